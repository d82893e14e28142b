#!/usr/bin/env python
"""
fidgap - Main Entry Point

Forwards its arguments to the fidgap management commands:

    python main.py demo depolarizing --out depolarizing.json
    python main.py fidelity depolarizing.json --out results/depolarizing --svg curve.svg
"""
import os
import sys


def main():
    """Run a fidgap command (validate, gap, fidelity, sweep, demo)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'backend.settings')

    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc

    execute_from_command_line(['main.py'] + sys.argv[1:])


if __name__ == '__main__':
    main()
