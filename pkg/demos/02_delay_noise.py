import numpy as np

from fdaflock import NoiseSchedule, ScenarioConfig, run, sigma_at

# Perturbed mode: every observer sees its neighbours tau = 0.4 s late,
# plus time-varying Gaussian noise on position, velocity and control.
sched = NoiseSchedule()
for t in [0.0, 0.1, 0.2, 0.3]:
    print("t=%.1f  sigma(p, v, u) =" % t, np.round(sigma_at(sched, t), 4))

config = ScenarioConfig(mode="perturbed", seed=3)
for model in ["reactive", "fda"]:
    clean = run(config.replace(mode="nominal", model=model), keep_states=False)
    noisy = run(config.replace(model=model), keep_states=False)
    print(model, "gamma nominal %.4f perturbed %.4f" % (clean.final_gamma, noisy.final_gamma))

# With no delay and a silent schedule the perturbed path is the nominal one.
a = run(config.replace(tau=0.0, schedule=NoiseSchedule.zero()))
b = run(config.replace(tau=0.0, mode="nominal"))
print("identical:", np.array_equal(a.final_state.positions, b.final_state.positions))
