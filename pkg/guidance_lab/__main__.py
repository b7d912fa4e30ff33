'''
Entry point for running guidance_lab as a module
'''
import sys

from .infrastructure.cli.guidance_cli import main

if __name__ == '__main__':
    sys.exit(main())
