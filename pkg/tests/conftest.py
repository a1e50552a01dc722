import csv
import io

import numpy as np
import pytest

from ellipstat import datasets, kissing
from ellipstat import statellipse as st


@pytest.fixture(scope="session")
def galton_sample():
    rows = list(csv.reader(io.StringIO(datasets.fixture_csv_text("galton"))))
    arr = np.array([[float(v) for v in r] for r in rows[1:]])
    return st.Sample(arr, ("parent", "child"))


@pytest.fixture(scope="session")
def iris_grouped():
    return datasets.load_iris_grouped()


@pytest.fixture(scope="session")
def longley():
    rows = list(csv.reader(io.StringIO(datasets.fixture_csv_text("longley"))))
    hdr = rows[0]
    arr = np.array([[float(v) for v in r] for r in rows[1:]])
    return hdr, arr[:, :6], arr[:, 6]     # names, predictors, Employed


@pytest.fixture(scope="session")
def berkey_studies():
    rows = list(csv.reader(io.StringIO(datasets.fixture_csv_text("berkey"))))
    studies = []
    for r in rows[1:]:
        y = [float(r[3]), float(r[4])]
        s_mat = [[float(r[5]), float(r[6])], [float(r[6]), float(r[7])]]
        studies.append(kissing.MetaStudy(y, s_mat, label=r[0]))
    return studies


def random_pd(rng, p, scale=1.0):
    a = rng.standard_normal((p, p))
    return scale * (a @ a.T + p * np.eye(p))


def random_psd(rng, p, rank=None):
    rank = rank if rank is not None else p
    a = rng.standard_normal((p, rank))
    return a @ a.T
