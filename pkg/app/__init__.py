# Intuitionistic modal prover package
