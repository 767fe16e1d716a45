import os
import sys

COMMANDS = ('capacity', 'typicality', 'decode', 'bounds', 'trajectories')


def main(argv=None):
    """holevo-lab <command> [flags]: the simulation commands without manage.py."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in COMMANDS:
        print(f"usage: holevo-lab {{{','.join(COMMANDS)}}} [flags]", file=sys.stderr)
        return 2
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'holevo_lab.settings')
    import django
    from django.core.management import call_command
    from django.core.management.base import CommandError

    django.setup()
    try:
        call_command(*argv)
    except CommandError as exc:
        print(f"CommandError: {exc}", file=sys.stderr)
        return exc.returncode
    return 0


if __name__ == "__main__":
    sys.exit(main())
