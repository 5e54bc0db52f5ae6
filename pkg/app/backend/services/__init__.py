# Services package initialization: REST API and command line
