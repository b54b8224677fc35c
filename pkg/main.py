import argparse
import logging
import sys

import config
from modules.errors import InvalidConfigError
from modules.experiment import compare, load_config, regenerate_pattern, run_experiment


def build_parser():
    parser = argparse.ArgumentParser(
        prog="antsynth",
        description="Linear array synthesis with the ant-bridge optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Run the configured optimizer once")
    run_p.add_argument("config_path", help="YAML experiment file")
    run_p.add_argument("-o", "--output-dir", help="Override the output directory")

    cmp_p = sub.add_parser("compare", help="Compare optimizers under an equal evaluation budget")
    cmp_p.add_argument("config_path", help="YAML experiment file")
    cmp_p.add_argument("--optimizers", default=",".join(config.OPTIMIZERS),
                       help="Comma separated optimizer names (default: noabs,pso,ga)")
    cmp_p.add_argument("-o", "--output-dir", help="Override the output directory")

    pat_p = sub.add_parser("pattern", help="Re-emit pattern.csv for a saved best_vector.json")
    pat_p.add_argument("vector_path", help="best_vector.json from a previous run")
    pat_p.add_argument("config_path", help="YAML experiment file the vector came from")
    pat_p.add_argument("-o", "--output-dir", help="Override the output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(args.config_path)
        if args.command == "run":
            run_experiment(cfg, args.output_dir)
        elif args.command == "compare":
            names = [n.strip() for n in args.optimizers.split(",") if n.strip()]
            compare(cfg, names, args.output_dir)
        else:
            regenerate_pattern(args.vector_path, cfg, args.output_dir)
    except InvalidConfigError as e:
        print(f"[-] Configuration error: {e}")
        return 2
    except Exception as e:
        print(f"[-] {args.command} failed: {e}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
