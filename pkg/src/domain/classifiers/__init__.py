"""From-scratch binary classifiers behind one train/predict contract."""
