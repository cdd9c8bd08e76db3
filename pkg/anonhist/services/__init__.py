# Mechanisms, projections, encodings and experiments
