import holab as hl

# Parse a run file, flags and defaults included
config = hl.parse_config(
    """
[system]
family = "B"
rank = 2
k = [0.5, 2.0]

[experiment]
name = "hw"
paths = 2000
horizon = 20.0

[run]
seed = 7
out = "output/files/hw_b2"
"""
)

# Simulate, estimate and write hw_result.json, hw_table.csv and manifest.json
status = hl.run(config)
