// controller tests below
