"""mb-hybrid4x: a compact 4X engine steered by pluggable macro strategists, with an experiment harness."""
