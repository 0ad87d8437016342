from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.validation import parse_angle

GridValue = Union[float, str]


class GridSpec(BaseModel):
    """
    Entity: Grid Specification
    Description: A 1D sampling grid given either as start/stop/num or as explicit values.
    Values may be written as multiples of pi ("0.432pi") for angle grids.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = Field(None, ge=1)
    values: Optional[List[float]] = None

    @field_validator("start", "stop", mode="before")
    @classmethod
    def _parse_bound(cls, value):
        return None if value is None else parse_angle(value)

    @field_validator("values", mode="before")
    @classmethod
    def _parse_values(cls, value):
        if value is None:
            return None
        return [parse_angle(item) for item in value]

    @model_validator(mode="after")
    def _check_form(self):
        ranged = self.start is not None and self.stop is not None and self.num is not None
        if self.values is not None and ranged:
            raise ValueError("Give either values or start/stop/num, not both")
        if self.values is None and not ranged:
            raise ValueError("Grid needs values or all of start, stop and num")
        if self.values is not None and len(self.values) == 0:
            raise ValueError("Grid values must not be empty")
        if ranged and self.num > 1 and not self.stop > self.start:
            raise ValueError("Grid stop must exceed start")
        return self

    def to_array(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return np.linspace(self.start, self.stop, self.num)

    @classmethod
    def linspace(cls, start: GridValue, stop: GridValue, num: int) -> "GridSpec":
        return cls(start=start, stop=stop, num=num)

    def __len__(self) -> int:
        return len(self.values) if self.values is not None else int(self.num)
