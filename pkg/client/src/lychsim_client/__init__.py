"""Thin client SDK for the lychsim simulation server.

Connect with LychSim(server_name, port), spawn and edit objects, pull
rendered ground-truth buffers as numpy arrays / PIL images, and drive the
adversarial viewpoint examiner with your own segmenter via
run_external_examiner.  No simulation logic lives here; everything is
computed server-side.
"""

from .client import LychSim, ServerError, TransportError, decode_tensor
from .examiner import (ClientExaminerConfig, ExaminerAborted, flawed_oracle,
                       perfect_oracle, run_external_examiner)

__version__ = "0.1.0"

__all__ = ["ClientExaminerConfig", "ExaminerAborted", "LychSim",
           "ServerError", "TransportError", "decode_tensor", "flawed_oracle",
           "perfect_oracle", "run_external_examiner"]
