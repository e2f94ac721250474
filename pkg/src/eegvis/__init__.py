"""eegvis - contrastive EEG features and data-efficient conditional image synthesis."""

__version__ = "0.1.0"
__author__ = "EEGVis Contributors"
