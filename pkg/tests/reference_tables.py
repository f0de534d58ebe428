"""Published simulation tables: relative errors of truncated MC and QMC.

Columns: p, n, m, mean_mc, q025_mc, q975_mc, mean_qmc.
"""

TABLE = [
    (1, 8, 400, -0.125982, -0.153374, -0.099533, -0.125993),
    (1, 8, 800, -0.126218, -0.145385, -0.107493, -0.126104),
    (1, 8, 1600, -0.126335, -0.139115, -0.112837, -0.126132),
    (1, 8, 3200, -0.126235, -0.136057, -0.117153, -0.126138),
    (1, 16, 400, -0.086792, -0.121971, -0.053978, -0.085939),
    (1, 16, 800, -0.08543, -0.111019, -0.061461, -0.086059),
    (1, 16, 1600, -0.08659, -0.103454, -0.068063, -0.086088),
    (1, 16, 3200, -0.086273, -0.098045, -0.074845, -0.086095),
    (1, 32, 400, -0.058232, -0.097963, -0.018753, -0.058531),
    (1, 32, 800, -0.058703, -0.084621, -0.029519, -0.058652),
    (1, 32, 1600, -0.058622, -0.07774, -0.037699, -0.05868),
    (1, 32, 3200, -0.058873, -0.073355, -0.044722, -0.058687),
    (1, 64, 400, -0.040983, -0.086923, 0.006367, -0.039708),
    (1, 64, 800, -0.039621, -0.072574, -0.005467, -0.039824),
    (1, 64, 1600, -0.039285, -0.06428, -0.015697, -0.039851),
    (1, 64, 3200, -0.039527, -0.056466, -0.022456, -0.039857),
    (2, 8, 400, -0.059646, -0.129644, 0.017436, -0.056819),
    (2, 8, 800, -0.059564, -0.113554, -0.009089, -0.057973),
    (2, 8, 1600, -0.059759, -0.097967, -0.020003, -0.059975),
    (2, 8, 3200, -0.060711, -0.086297, -0.033685, -0.060136),
    (2, 16, 400, -0.031025, -0.126524, 0.05845, -0.025944),
    (2, 16, 800, -0.030583, -0.095416, 0.036938, -0.027276),
    (2, 16, 1600, -0.030507, -0.077855, 0.01728, -0.030106),
    (2, 16, 3200, -0.030091, -0.063221, 0.003664, -0.030202),
    (2, 32, 400, -0.016414, -0.130159, 0.101234, -0.009653),
    (2, 32, 800, -0.014486, -0.09123, 0.064283, -0.011323),
    (2, 32, 1600, -0.014516, -0.067956, 0.043124, -0.014956),
    (2, 32, 3200, -0.014922, -0.053751, 0.024186, -0.014958),
    (2, 64, 400, -0.008859, -0.129531, 0.118252, -0.000824),
    (2, 64, 800, -0.008666, -0.095414, 0.085371, -0.003026),
    (2, 64, 1600, -0.007485, -0.0718, 0.05585, -0.007394),
    (2, 64, 3200, -0.007334, -0.053565, 0.039549, -0.007274),
    (4, 8, 400, -0.008929, -0.26698, 0.278155, 0.045932),
    (4, 8, 800, -0.006475, -0.189544, 0.180882, 0.008732),
    (4, 8, 1600, -0.010506, -0.142256, 0.134897, -0.012457),
    (4, 8, 3200, -0.006877, -0.099015, 0.093834, -0.015314),
    (4, 16, 400, -0.002282, -0.325366, 0.396144, 0.086599),
    (4, 16, 800, 0.000427, -0.229492, 0.266101, 0.027705),
    (4, 16, 1600, -0.001236, -0.178641, 0.180994, -0.006613),
    (4, 16, 3200, -0.002734, -0.124856, 0.117629, -0.012749),
    (4, 32, 400, 0.000894, -0.393482, 0.511684, 0.118669),
    (4, 32, 800, -0.002124, -0.273851, 0.325494, 0.040281),
    (4, 32, 1600, 0.001899, -0.210273, 0.223822, -0.006128),
    (4, 32, 3200, 0.000415, -0.138241, 0.167645, -0.015105),
    (4, 64, 400, -0.005731, -0.468204, 0.596599, 0.140998),
    (4, 64, 800, -0.006463, -0.345192, 0.402549, 0.047082),
    (4, 64, 1600, -0.000577, -0.227556, 0.27543, -0.008002),
    (4, 64, 3200, -0.000274, -0.185032, 0.200968, -0.019148),
    (8, 8, 400, 0.084861, -0.953905, 4.936026, -0.46524),
    (8, 8, 800, 0.025032, -0.891627, 3.540811, -0.414345),
    (8, 8, 1600, 0.046622, -0.790689, 2.524881, -0.442301),
    (8, 8, 3200, -0.002301, -0.716486, 1.639213, -0.137481),
    (8, 16, 400, -0.170066, -0.990298, 4.704067, -0.673619),
    (8, 16, 800, 0.017445, -0.957049, 4.61004, -0.643797),
    (8, 16, 1600, 0.011627, -0.92231, 4.030156, -0.61655),
    (8, 16, 3200, 0.046587, -0.861213, 3.451607, -0.291093),
    (8, 32, 400, 0.088609, -0.99709, 7.635046, -0.824456),
    (8, 32, 800, -0.014428, -0.989544, 4.928271, -0.811912),
    (8, 32, 1600, -0.115838, -0.970739, 3.956533, -0.763803),
    (8, 32, 3200, 0.106969, -0.929065, 4.795452, -0.467314),
    (8, 64, 400, 0.197498, -0.999515, 13.943347, -0.915594),
    (8, 64, 800, 0.059107, -0.997255, 7.343841, -0.912046),
    (8, 64, 1600, 0.020557, -0.990012, 7.198481, -0.86825),
    (8, 64, 3200, 0.007722, -0.96671, 4.848322, -0.629245),
]


def by_cell():
    return {(r[0], r[1], r[2]): r for r in TABLE}
