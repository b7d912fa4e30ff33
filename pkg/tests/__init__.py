# Test package for Guidance Lab
