###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################

import os
import json
import math

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.exceptions import InvalidRecord


def encode_record(record):
    """Serialize a record as a single line of text.

    Field order is preserved so persisted files read in the
    documented order.
    """

    return json.dumps(record, separators=(',', ':'), allow_nan=False) + '\n'


def decode_record(line):
    """Parse a single record line."""

    try:
        return json.loads(line)
    except ValueError:
        raise InvalidRecord('Malformed record: %s' % line.strip())


def read_records(record_file):
    """Read all complete records from a line-delimited file.

    A trailing line without a newline is a partially written
    record and is ignored.

    Parameters
    ----------
    record_file : str
        File to read.

    Returns
    -------
    list
        Records in file order.
    """

    records = []
    with open(record_file) as f:
        for line in f:
            if not line.endswith('\n'):
                break
            if line.strip():
                records.append(decode_record(line))

    return records


def truncate_torn_tail(record_file):
    """Cut a partially written last record from a line-delimited file.

    Returns
    -------
    int
        Number of bytes removed.
    """

    with open(record_file, 'rb+') as f:
        f.seek(0, os.SEEK_END)
        size = f.tell()
        if size == 0:
            return 0

        # scan back to the last newline
        pos = size
        while pos > 0:
            step = min(4096, pos)
            f.seek(pos - step)
            block = f.read(step)
            nl = block.rfind(b'\n')
            if nl >= 0:
                pos = pos - step + nl + 1
                break
            pos -= step

        if pos < size:
            f.truncate(pos)

    return size - pos


def write_sparse(rows, output_file):
    """Write labelled rows in sparse `label idx:value` format.

    Indices are 1-based and zero values are omitted. A row
    with several targets writes them comma separated.

    Parameters
    ----------
    rows : iterable
        Pairs of (label or tuple of labels, feature vector).
    output_file : str
        File to write.
    """

    fout = open(output_file, 'w')
    for label, features in rows:
        if isinstance(label, (tuple, list)):
            label_str = ','.join([str(int(l)) for l in label])
        else:
            label_str = str(int(label))

        entries = ['%d:%r' % (i + 1, float(v)) for i, v in enumerate(features) if v != 0]
        fout.write(' '.join([label_str] + entries) + '\n')
    fout.close()


def read_sparse(input_file, num_features):
    """Read rows written by write_sparse.

    Parameters
    ----------
    input_file : str
        File to read.
    num_features : int
        Dimensionality of the feature vectors.

    Returns
    -------
    list
        Pairs of (label or tuple of labels, numpy array).
    """

    rows = []
    for line in open(input_file):
        line_split = line.split()
        if not line_split:
            continue

        labels = [int(l) for l in line_split[0].split(',')]
        label = labels[0] if len(labels) == 1 else tuple(labels)

        features = np.zeros(num_features)
        for entry in line_split[1:]:
            idx, value = entry.split(':')
            features[int(idx) - 1] = float(value)

        rows.append((label, features))

    return rows


def zscore_scales(values, floor=None):
    """Per-feature location and scale for z-scoring.

    Parameters
    ----------
    values : array_like
        Matrix with one row per observation.
    floor : float or array_like
        Smallest scale allowed for each feature.

    Returns
    -------
    numpy.ndarray
        Per-feature mean.
    numpy.ndarray
        Per-feature scale.
    """

    values = np.asarray(values, dtype=float)
    if floor is None:
        floor = DefaultValues.STD_FLOOR

    loc = values.mean(axis=0)
    if values.shape[0] > 1:
        scale = values.std(axis=0, ddof=1)
    else:
        scale = np.zeros(values.shape[1])

    return loc, np.maximum(scale, np.maximum(floor, DefaultValues.STD_FLOOR))


def standardize(values, loc, scale):
    """Apply a z-score transform."""

    return (np.asarray(values, dtype=float) - loc) / scale


def standardized_distance(u, v, scale):
    """L2 distance between two vectors after dividing by scale."""

    diff = (np.asarray(u, dtype=float) - np.asarray(v, dtype=float)) / scale
    return float(np.sqrt(np.dot(diff, diff)))


def nearest_rank(sorted_values, q):
    """Nearest-rank percentile: the ceil(q*n)-th order statistic."""

    n = len(sorted_values)
    rank = max(1, int(math.ceil(round(q * n, 9))))
    return sorted_values[min(rank, n) - 1]


def index_ranges(indices):
    """Compress window indices into inclusive [start, end] ranges."""

    ranges = []
    for idx in sorted(set(indices)):
        if ranges and idx == ranges[-1][1] + 1:
            ranges[-1][1] = idx
        else:
            ranges.append([idx, idx])

    return ranges


def expand_ranges(ranges):
    """Inverse of index_ranges."""

    indices = []
    for start, end in ranges:
        indices.extend(range(start, end + 1))

    return indices
