"""Test suite for shiftlab."""
