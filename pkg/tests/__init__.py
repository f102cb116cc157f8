"""
Test suite for lane.
"""
