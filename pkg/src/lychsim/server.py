"""TCP simulation server: framed protocol over localhost sockets.

Connections are handled by a reader thread each; requests go to a shared
worker pool, so slow renders never head-of-line-block state queries on the
same connection — responses are matched by id and may complete out of
order.  World mutations serialize through the world's own writer lock
while renders run on immutable snapshots.

Run with:  python -m lychsim.server --port 9000 --catalog manifest.json
Flags fall back to SIM_* environment variables, then to defaults.
"""

import argparse
import json
import logging
import os
import socket
import threading
from concurrent.futures import ThreadPoolExecutor

from .assets import Catalog, load_catalog
from .dispatch import Dispatcher
from .errors import SimError
from .procedural import parse_rules
from .protocol import (FrameTooLarge, ProtocolError, decode_payload,
                       encode_frame, read_frame, response, socket_recv_exact)
from .world import SceneWorld

log = logging.getLogger("lychsim.server")

DEFAULT_PORT = 9000
DEFAULT_BIND = "127.0.0.1"


class _Connection:
    def __init__(self, sock, addr):
        self.sock = sock
        self.addr = addr
        self.write_lock = threading.Lock()
        self.open = True

    def send(self, message) -> bool:
        try:
            frame = encode_frame(message)
        except FrameTooLarge:
            log.error("response to %s exceeds frame cap; dropping", self.addr)
            self.close()
            return False
        with self.write_lock:
            if not self.open:
                return False
            try:
                self.sock.sendall(frame)
                return True
            except OSError:
                self.open = False
                return False

    def close(self):
        with self.write_lock:
            self.open = False
            try:
                self.sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self.sock.close()


class SimServer:
    """One world per process, many concurrent client connections."""

    def __init__(self, world: SceneWorld, host=DEFAULT_BIND, port=DEFAULT_PORT,
                 rules=None, workers=None):
        self.world = world
        self.dispatcher = Dispatcher(world, rules=rules)
        self.host = host
        self.port = port
        self.workers = workers or min(32, 4 * (os.cpu_count() or 1))
        self._listener = None
        self._pool = None
        self._accept_thread = None
        self._connections = set()
        self._conn_lock = threading.Lock()
        self._stopping = threading.Event()

    def start(self):
        self._listener = socket.create_server((self.host, self.port))
        self._listener.settimeout(0.2)  # lets the accept loop notice stop()
        self.port = self._listener.getsockname()[1]
        self._pool = ThreadPoolExecutor(max_workers=self.workers)
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               name="sim-accept", daemon=True)
        self._accept_thread.start()
        log.info("serving on %s:%d", self.host, self.port)
        return self

    def stop(self):
        """Graceful shutdown: stop accepting, drain in-flight work."""
        self._stopping.set()
        if self._listener is not None:
            self._listener.close()
        if self._pool is not None:
            self._pool.shutdown(wait=True)
        with self._conn_lock:
            conns = list(self._connections)
        for conn in conns:
            conn.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)

    def serve_forever(self):
        self.start()
        try:
            self._accept_thread.join()
        except KeyboardInterrupt:
            log.info("shutting down")
        finally:
            self.stop()

    # -- internals -----------------------------------------------------------

    def _accept_loop(self):
        while not self._stopping.is_set():
            try:
                sock, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)
            conn = _Connection(sock, addr)
            with self._conn_lock:
                self._connections.add(conn)
            threading.Thread(target=self._reader_loop, args=(conn,),
                             name=f"sim-conn-{addr}", daemon=True).start()

    def _reader_loop(self, conn: _Connection):
        recv_exact = socket_recv_exact(conn.sock)
        try:
            while True:
                try:
                    payload = read_frame(recv_exact)
                except FrameTooLarge:
                    log.warning("%s: oversize frame; closing", conn.addr)
                    return
                except (ProtocolError, OSError):
                    return
                if payload is None:
                    return
                try:
                    message = decode_payload(payload)
                except ProtocolError:
                    conn.send(response(0, status="unknown_argument_format"))
                    return
                self._submit(conn, message)
        finally:
            conn.close()
            with self._conn_lock:
                self._connections.discard(conn)

    def _submit(self, conn, message):
        req_id = message.get("id")
        if not isinstance(req_id, int) or isinstance(req_id, bool):
            conn.send(response(0, status="unknown_argument_format"))
            return
        try:
            self._pool.submit(self._handle, conn, req_id, message)
        except RuntimeError:
            conn.send(response(req_id, status="server_shutting_down"))

    def _handle(self, conn, req_id, message):
        cmd = message.get("cmd")
        args = message.get("args", {})
        if not isinstance(cmd, str):
            conn.send(response(req_id, status="unknown_argument_format"))
            return
        try:
            data, tensors = self.dispatcher.dispatch(cmd, args)
            conn.send(response(req_id, data=data, tensors=tensors))
        except SimError as exc:
            conn.send(response(req_id, status=exc.code))
        except Exception:
            log.exception("command %r failed", cmd)
            conn.send(response(req_id, status="internal_error"))


def _env(name, default):
    return os.environ.get(f"SIM_{name}", default)


def build_arg_parser():
    parser = argparse.ArgumentParser(
        prog="python -m lychsim.server",
        description="Headless simulation server (framed JSON protocol).")
    parser.add_argument("--port", type=int, default=int(_env("PORT", DEFAULT_PORT)),
                        help="TCP port (default 9000; env SIM_PORT)")
    parser.add_argument("--bind", default=_env("BIND", DEFAULT_BIND),
                        help="bind address (default 127.0.0.1; env SIM_BIND)")
    parser.add_argument("--catalog", default=_env("CATALOG", None),
                        help="asset manifest JSON (env SIM_CATALOG)")
    parser.add_argument("--rules", default=_env("RULES", None),
                        help="procedural rule file (env SIM_RULES)")
    parser.add_argument("--snapshot", default=_env("SNAPSHOT", None),
                        help="scene snapshot to load at startup (env SIM_SNAPSHOT)")
    parser.add_argument("--log-level", default=_env("LOG_LEVEL", "info"),
                        help="debug|info|warning|error (env SIM_LOG_LEVEL)")
    return parser


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    catalog = load_catalog(args.catalog) if args.catalog else Catalog()
    world = SceneWorld(catalog)
    if args.snapshot:
        with open(args.snapshot, "r", encoding="utf-8") as fh:
            world.load_snapshot(json.load(fh))
    rules = parse_rules(args.rules) if args.rules else None
    server = SimServer(world, host=args.bind, port=args.port, rules=rules)
    server.serve_forever()


if __name__ == "__main__":
    main()
