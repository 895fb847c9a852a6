"""Collisions of the flat spectrum and what a small wave does to them.

At a = 0 the Hill eigenvalues are i Omega(n + tau) and pairs of them meet at
the collision values gamma_c listed first.  Turning on a small amplitude
could push such a pair off the imaginary axis; the audit evaluates the
spectrum at each collision and at detuned neighbours and reports the largest
real part against the noise floor.

    python3 demos/collision_audit.py
"""

from kdstab.flatspec import collisions_to_csv, enumerate_collisions
from kdstab.model import ModelParams, WaveParams
from kdstab.sweep import collision_audit

taus = [0.1, 0.25, 0.5]
print(collisions_to_csv(enumerate_collisions(3, taus)))

entries = collision_audit(ModelParams(1.0, 1.0), WaveParams(1.0, 0.03), 3, tau_grid=taus)
print(f"{'delta':>5} {'n':>3} {'tau':>5} {'eps':>9} {'max_re':>10} {'floor':>9} stable")
for e in entries:
    c, s = e.collision, e.spectrum
    print(f"{c.delta:5d} {c.n:3d} {c.tau:5.2f} {e.epsilon:9.2e} "
          f"{s.max_real_part:10.2e} {s.noise_floor:9.1e} {e.stable}")
print(f"{sum(e.stable for e in entries)} of {len(entries)} audited points stable")
