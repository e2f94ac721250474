"""EEG encoder: recurrent model, triplet mining and training loops."""
