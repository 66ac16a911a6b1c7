"""Kingman convolution algebra on the nonnegative orthant and its processes."""
