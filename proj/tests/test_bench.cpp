// bench tests below
