# Utils package initialization: formulas, sequents, rules, search and models
