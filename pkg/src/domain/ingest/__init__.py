"""SisFall trial discovery, parsing, calibration and labelling."""
