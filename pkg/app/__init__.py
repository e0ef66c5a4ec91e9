# Groupoid-dim 1.0
