# src/__main__.py

from principal_trace.cli import cli

if __name__ == "__main__":
    cli()
