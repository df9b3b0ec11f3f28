import csv
import io
from typing import List, Optional

from app.models.fields import ScalarField
from app.models.render import FieldSample
from app.utils.formatting import CSV_PLACES, format_number

FIELD_HEADER = ["lat_deg", "lon_deg", "x", "y", "a", "b", "theta_rad", "omega_rad", "area_scale"]
SCALAR_HEADER = ["x", "y", "value"]


def _writer(buffer: io.StringIO):
    return csv.writer(buffer, lineterminator="\n")


def export_csv(samples: List[FieldSample]) -> str:
    """Indicatrix table, one row per sample; degenerate samples leave the indicatrix columns empty."""
    buffer = io.StringIO()
    writer = _writer(buffer)
    writer.writerow(FIELD_HEADER)

    for sample in samples:
        ind = sample.ind
        values = [sample.geo.lat_deg, sample.geo.lon_deg, sample.plane.x, sample.plane.y]
        if ind is None:
            values += [None] * 5
        else:
            values += [ind.a, ind.b, ind.theta, ind.omega, ind.area_scale]
        writer.writerow([format_number(value, CSV_PLACES) for value in values])

    return buffer.getvalue()


def export_field_csv(field: ScalarField, channel: Optional[str] = None) -> str:
    """x,y,value rows for the masked nodes of a scalar field or one of its channels."""
    buffer = io.StringIO()
    writer = _writer(buffer)
    writer.writerow(SCALAR_HEADER)

    xs, ys = field.grid.mesh()
    source = field.values if channel is None else field.channels[channel]
    for x, y, value, keep in zip(xs.ravel(), ys.ravel(), source.ravel(), field.mask.ravel()):
        if keep:
            writer.writerow([format_number(float(v), CSV_PLACES) for v in (x, y, value)])

    return buffer.getvalue()
