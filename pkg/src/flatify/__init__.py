"""Flatification by blow-ups on affine charts over QQ."""
