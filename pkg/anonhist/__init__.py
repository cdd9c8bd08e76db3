# Differentially private release of anonymized histograms
__version__ = "0.1.0"
