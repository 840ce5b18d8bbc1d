"""Shared-phase surrogates keep the linear structure and destroy the rest.

chi measures how many surrogate standard deviations the observed MI sits above
the ensemble; zeta is the relative MI excess.  The regime-switch panel is
linear in its first half and nonlinearly coupled in its second.
"""

import numpy as np

from nlcorr import SynthSpec, analyze_window, gen_synthetic, make_surrogates, rolling_windows, WindowSpec
from nlcorr.dependence import pearson_matrix

panel = gen_synthetic(SynthSpec(n_series=4, length=2000, regime="regime-switch",
                                correlation=0.5, coupling=0.5), seed=2)

ens = make_surrogates(panel, K=20, seed=0)
drift = max(np.abs(pearson_matrix(r) - pearson_matrix(panel.returns)).max() for r in ens.realizations)
print(f"largest Pearson change across 20 surrogates: {drift:.2e}")

for w in rolling_windows(panel, WindowSpec(1000, 1000)):
    res = analyze_window(w, K=20, seed=w.index)
    print(f"window {w.index}: mean zeta {res.zeta_mean:.3f}, "
          f"mean chi {res.profile.global_average:.2f}, chi[0,1] {res.chi.values[0, 1]:.2f}")
