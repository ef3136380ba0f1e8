// cli tests below
