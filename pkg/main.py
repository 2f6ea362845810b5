import sys

from transit_ages.cli import execute

if __name__ == "__main__":
    sys.exit(execute(sys.argv[1:]))
