# Empty file to mark tests directory
