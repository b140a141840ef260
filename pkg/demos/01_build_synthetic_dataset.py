"""Build a synthetic measurement world and look at its shape.

The synthetic world stands in for a real encoder farm: each (video,
resolution, qp) cell gets an encoding/decoding time and energy, a bitrate,
and PSNR/VMAF scores, all driven by one per-video complexity draw plus
multiplicative measurement noise. Energies span roughly two orders of
magnitude between the cheap corner (lowest resolution, highest QP) and the
expensive one (highest resolution, lowest QP), mirroring real ladders.
"""

import numpy as np

from greenladder import SyntheticWorldParams, default_space, synth_generate
from greenladder.core import save_dataset

space = default_space()
params = SyntheticWorldParams(n_videos=20, noise_sd=0.05, seed=7)
ds = synth_generate(params, space)

print(f"videos: {len(ds.video_ids)}, records: {len(ds)} "
      f"({len(space.resolutions)} resolutions x {len(space.qps)} QPs)")

print("\nmean encoding energy (Wh) by cell:")
header = "height\\qp " + " ".join(f"{qp:>8d}" for qp in space.qps)
print(header)
for res in space.resolutions:
    row = [f"{res.height:>9d}"]
    for qp in space.qps:
        cells = [r.enc_energy for r in ds.records
                 if r.rep.height == res.height and r.rep.qp == qp]
        row.append(f"{np.mean(cells):8.3f}")
    print(" ".join(row))

cheap = [r.enc_energy for r in ds.records if r.rep.height == 360 and r.rep.qp == 47]
costly = [r.enc_energy for r in ds.records if r.rep.height == 2160 and r.rep.qp == 17]
print(f"\nenergy span: {np.mean(costly) / np.mean(cheap):.0f}x "
      f"between 2160p/17 and 360p/47")

anchor = space.anchor_rep
anchor_times = [r.enc_time for r in ds.records
                if r.rep.height == anchor.height and r.rep.qp == anchor.qp]
print(f"mean anchor encode time ({anchor.height}p/{anchor.qp}): "
      f"{np.mean(anchor_times):.2f} s")

save_dataset(ds, "synthetic_demo.csv")
print("\nwrote synthetic_demo.csv")
