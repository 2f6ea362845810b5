from transit_ages.cli.app import build_parser, execute
from transit_ages.cli.output import RunManifest, frame_to_csv
