"""Test suite for eegvis."""
