import logging
import sys

import numpy as np

root_logger = logging.getLogger()
root_logger.setLevel(logging.DEBUG)

handler = logging.StreamHandler(sys.stdout)
handler.setLevel(logging.DEBUG)
formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
handler.setFormatter(formatter)
root_logger.addHandler(handler)


def random_psd(N, rank, seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((rank, N)) + 1j * rng.standard_normal((rank, N))
    return V.T @ V.conj()


def random_hermitian(N, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return 0.5 * (A + A.conj().T)
