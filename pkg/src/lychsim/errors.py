"""Error type carrying the wire-level status code strings.

Status codes surface verbatim in protocol and MCP responses, so they are
stable identifiers, not prose.
"""

OBJECT_EXISTS = "object_with_same_name_already_exists"
FAILED_TO_SPAWN = "failed_to_spawn_actor"
BAD_ARGS = "unknown_argument_format"
OBJECT_NOT_FOUND = "object_not_found"
ROTATION_LOCKED = "rotation_locked"
CAMERA_NOT_FOUND = "camera_not_found"
ASSET_NOT_FOUND = "asset_not_found"
ASSET_EMPTY = "asset_empty"
EXTENT_UNAVAILABLE = "mesh_extent_unavailable"
UNKNOWN_COMMAND = "unknown_command"
INFEASIBLE = "sampling_infeasible"
VERSION_MISMATCH = "version_mismatch"


class SimError(Exception):
    """Error with a stable status code plus an optional human detail."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)
