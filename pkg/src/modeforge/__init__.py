"""Design and verification of mode-engineered XX gates on trapped-ion chains."""
