// articulation tests below
