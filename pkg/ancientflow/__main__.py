from ancientflow.cli import run

run()
