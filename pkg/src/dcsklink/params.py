"""System-level parameters shared by the transmitter, channel, and receiver."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SystemParams:
    """One operating point of the link.

    Powers are expressed in units of chip energy: the reference block energy
    is treated as spreading/2 analytically (mean chip power 1/2 under the
    logistic invariant density), and the decode threshold ``decode_power``
    lives on the same scale.
    """

    n_subcarriers: int
    mod_order: int
    n_antennas: int
    spreading: int
    power_split: float
    harvest_eff: float
    decode_power: float
    ebn0_db: float

    def __post_init__(self):
        n = self.n_subcarriers
        if n < 2 or n > 64 or (n & (n - 1)) != 0:
            raise ValueError(f"subcarrier count must be a power of two in [2, 64], got {n}")
        if self.mod_order not in (2, 4, 8, 16):
            raise ValueError(f"constellation order must be one of 2, 4, 8, 16, got {self.mod_order}")
        if self.n_antennas < 1:
            raise ValueError(f"antenna count must be >= 1, got {self.n_antennas}")
        if self.spreading < 8 or self.spreading % 2 != 0:
            raise ValueError(f"spreading factor must be even and >= 8, got {self.spreading}")
        if not 0.0 <= self.power_split <= 1.0:
            raise ValueError(f"power-splitting ratio must lie in [0, 1], got {self.power_split}")
        if not 0.0 <= self.harvest_eff <= 1.0:
            raise ValueError(f"harvesting efficiency must lie in [0, 1], got {self.harvest_eff}")
        if self.decode_power < 0.0:
            raise ValueError(f"decode power threshold must be >= 0, got {self.decode_power}")

    @property
    def cim_bits(self) -> int:
        return int(math.log2(self.n_subcarriers))

    @property
    def data_bits(self) -> int:
        return self.n_subcarriers * int(math.log2(self.mod_order))

    @property
    def bits_per_frame(self) -> int:
        return self.cim_bits + self.data_bits

    @property
    def sequence_energy(self) -> float:
        """Analytical reference block energy (mean chip power 1/2)."""
        return self.spreading / 2.0

    @property
    def bit_energy(self) -> float:
        """Average transmitted energy per information bit, 2*N*E1/bits."""
        return 2.0 * self.n_subcarriers * self.sequence_energy / self.bits_per_frame

    @property
    def noise_density(self) -> float:
        """One-sided noise density N0; zero when ebn0_db is infinite."""
        if math.isinf(self.ebn0_db):
            return 0.0
        return self.bit_energy / (10.0 ** (self.ebn0_db / 10.0))

    def with_ebn0(self, ebn0_db: float) -> "SystemParams":
        return SystemParams(
            n_subcarriers=self.n_subcarriers,
            mod_order=self.mod_order,
            n_antennas=self.n_antennas,
            spreading=self.spreading,
            power_split=self.power_split,
            harvest_eff=self.harvest_eff,
            decode_power=self.decode_power,
            ebn0_db=ebn0_db,
        )


def default_decode_power(n_subcarriers: int, spreading: int) -> float:
    """Decode threshold used throughout: one percent of the frame energy 2*N*E1."""
    return 2.0 * n_subcarriers * (spreading / 2.0) / 100.0
