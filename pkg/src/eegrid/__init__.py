"""EEG classification from wavelet-packet band features laid out as channel matrices or scalp-topology grids."""
__version__ = "0.1.0"
