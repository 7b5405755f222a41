"""Program persistence: one canonical .sib.json file per stored name."""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path
from typing import List, Union

from .model import BlockProgram, InvalidName, NotFound, StorageFailure
from .serialize import parse, serialize

NAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
SUFFIX = ".sib.json"


class ProgramStore:
    """A directory of stored block programs.

    Writes are atomic (write-then-rename) so a concurrent reader never sees
    a half-written document. Names are restricted to a conservative charset,
    which also rules out path escapes.
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageFailure(f"cannot create program directory {self.root}: {e}") from e

    def _check_name(self, name: str) -> str:
        if not isinstance(name, str) or not NAME_RE.match(name):
            raise InvalidName(
                f"invalid program name {name!r}: must match [A-Za-z0-9_-]{{1,64}}"
            )
        return name

    def path_for(self, name: str) -> Path:
        return self.root / f"{self._check_name(name)}{SUFFIX}"

    def store(self, name: str, program: BlockProgram) -> str:
        """Write the canonical serialization, overwriting atomically."""
        path = self.path_for(name)
        data = serialize(program)
        try:
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(data)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        except OSError as e:
            raise StorageFailure(f"cannot store program {name!r}: {e}") from e
        return name

    def read_bytes(self, name: str) -> bytes:
        path = self.path_for(name)
        if not path.is_file():
            raise NotFound(f"no stored program named {name!r}")
        try:
            return path.read_bytes()
        except OSError as e:
            raise StorageFailure(f"cannot read program {name!r}: {e}") from e

    def load(self, name: str) -> BlockProgram:
        return parse(self.read_bytes(name))

    def list_names(self) -> List[str]:
        try:
            files = list(self.root.iterdir())
        except OSError as e:
            raise StorageFailure(f"cannot list program directory: {e}") from e
        names = [
            f.name[: -len(SUFFIX)]
            for f in files
            if f.name.endswith(SUFFIX) and NAME_RE.match(f.name[: -len(SUFFIX)])
        ]
        return sorted(names)
