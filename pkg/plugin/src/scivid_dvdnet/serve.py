"""Request loop and command line for the denoiser plugin.

Reads VDN1 requests from stdin and answers on stdout until the input
stream closes.  ``--echo`` answers every request with its own payload and
needs no model, so transport conformance can be tested without any ML
runtime.  Malformed requests get a type-3 error message and the loop
continues; a model that fails to load gets an error message and a nonzero
exit.
"""

import argparse
import os
import sys

from . import protocol


def default_weights_path():
    return os.path.join(os.path.dirname(__file__), "weights", "dvdnet_s.pt")


def serve(stdin, stdout, denoise):
    """Answer requests until EOF.  ``denoise(cube, sigma) -> cube``."""
    while True:
        try:
            req = protocol.read_request(stdin)
        except protocol.BadRequest as exc:
            stdout.write(protocol.pack_error(str(exc)))
            stdout.flush()
            continue
        if req is None:
            return 0
        cube, sigma = req
        try:
            out = denoise(cube, sigma)
            reply = protocol.pack_response(out, sigma)
        except Exception as exc:  # denoiser bug: report, keep serving
            reply = protocol.pack_error(f"denoiser failed: {exc}")
        stdout.write(reply)
        stdout.flush()


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scivid-dvdnet",
        description="Temporal-window video denoiser speaking VDN1 on "
                    "stdin/stdout.")
    parser.add_argument("--weights", default=None,
                        help="model checkpoint path (defaults to the "
                             "bundled weights)")
    parser.add_argument("--device", default="cpu",
                        help="torch device string")
    parser.add_argument("--echo", action="store_true",
                        help="return every payload unchanged (protocol "
                             "conformance mode, no model needed)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer

    if args.echo:
        return serve(stdin, stdout, lambda cube, sigma: cube)

    weights = args.weights or default_weights_path()
    try:
        from .model import denoise_cube, load_model
        model = load_model(weights, device=args.device)
    except Exception as exc:
        stdout.write(protocol.pack_error(f"model load failed: {exc}"))
        stdout.flush()
        return 1
    return serve(stdin, stdout,
                 lambda cube, sigma: denoise_cube(model, cube, sigma,
                                                  device=args.device))


if __name__ == "__main__":
    sys.exit(main())
