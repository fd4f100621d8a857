#ifndef MULTIPHASE_H
#define MULTIPHASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Largest photon number accepted by [`mp_qfi_exact`].
 */
#define MP_DENSE_CAP 12

/**
 * Result codes shared by every entry point.
 */
typedef enum MpStatus {
  MpStatus_Ok = 0,
  MpStatus_NullPointer = 1,
  MpStatus_InvalidArgument = 2,
  MpStatus_InvalidEta = 3,
  MpStatus_Singular = 4,
  MpStatus_NoPhotons = 5,
  MpStatus_Indivisible = 6,
  MpStatus_DimensionMismatch = 7,
  MpStatus_OccupationNotInBasis = 8,
  MpStatus_ZeroVector = 9,
  MpStatus_NotDensityOperator = 10,
  MpStatus_DenseCapExceeded = 11,
  MpStatus_Panic = 12,
} MpStatus;

typedef enum MpRegime {
  MpRegime_Heisenberg = 0,
  MpRegime_Crossover = 1,
  MpRegime_Sql = 2,
} MpRegime;

/**
 * Opaque normalized probe state.
 */
typedef struct MpProbe MpProbe;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Generalized N00N probe over d+1 modes with `n` photons.
 *
 * # Safety
 * `out` must be a valid pointer to a probe handle slot.
 */
enum MpStatus mp_probe_gnoon(uint32_t d, uint32_t n, struct MpProbe **out);

/**
 * Superposition of `terms` Fock components with `n` photons in total over
 * d+1 modes. `occupations` holds terms·(d+1) counts, reference mode first.
 *
 * # Safety
 * `occupations` and `amplitudes` must point to buffers of the stated sizes
 * and `out` to a probe handle slot.
 */
enum MpStatus mp_probe_custom(uint32_t d,
                              uint32_t n,
                              const uint32_t *occupations,
                              const double *amplitudes,
                              uintptr_t terms,
                              struct MpProbe **out);

/**
 * Two-mode probe Σ_k c_k |k, m−k⟩ with `m + 1` coefficients.
 *
 * # Safety
 * `coefficients` must hold `len` doubles and `out` be a probe handle slot.
 */
enum MpStatus mp_probe_ie2(uint32_t m,
                           const double *coefficients,
                           uintptr_t len,
                           struct MpProbe **out);

/**
 * Releases a probe. Null is ignored.
 *
 * # Safety
 * `probe` must come from an `mp_probe_*` constructor and not be used after.
 */
void mp_probe_free(struct MpProbe *probe);

/**
 * Number of phase modes d of a probe, 0 for a null handle.
 *
 * # Safety
 * `probe` must be null or a live handle.
 */
uintptr_t mp_probe_phases(const struct MpProbe *probe);

/**
 * C_Q at explicit gauges. `eta` and `delta` hold d values each.
 * `out_matrix` is optional.
 *
 * # Safety
 * Buffers must match d = [`mp_probe_phases`]; `out_trace_inverse` must be
 * valid.
 */
enum MpStatus mp_cq_bound(const struct MpProbe *probe,
                          const double *eta,
                          const double *delta,
                          double *out_matrix,
                          double *out_trace_inverse);

/**
 * Tightest Tr[C_Q⁻¹] over the gauge. With `uniform` a single δ is shared.
 * `out_delta` (d values) and `out_matrix` are optional.
 *
 * # Safety
 * Buffers must match d = [`mp_probe_phases`]; `out_trace_inverse` must be
 * valid.
 */
enum MpStatus mp_optimize_delta(const struct MpProbe *probe,
                                const double *eta,
                                bool uniform,
                                double *out_delta,
                                double *out_matrix,
                                double *out_trace_inverse);

/**
 * Lossless QFI matrix. Both outputs are optional; a singular matrix
 * reports [`MpStatus::Singular`] after writing `out_matrix`.
 *
 * # Safety
 * `out_matrix` must hold d·d doubles when non-null.
 */
enum MpStatus mp_qfi_pure(const struct MpProbe *probe,
                          double *out_matrix,
                          double *out_trace_inverse);

/**
 * Exact QFI after uniform loss `eta` on every mode, reference included.
 * All outputs are optional. Probes above [`MP_DENSE_CAP`] photons are
 * rejected.
 *
 * # Safety
 * `out_matrix` must hold d·d doubles when non-null.
 */
enum MpStatus mp_qfi_exact(const struct MpProbe *probe,
                           double eta,
                           double *out_matrix,
                           double *out_trace_inverse,
                           double *out_residual);

/**
 * Closed-form single-phase C_Q for phase-mode mean and variance.
 *
 * # Safety
 * `out` must be valid.
 */
enum MpStatus mp_single_phase_bound(double mean, double variance, double eta, double *out);

/**
 * Total IE variance with N/d photons per phase.
 *
 * # Safety
 * `out` must be valid.
 */
enum MpStatus mp_ie_total_variance(uint32_t d, uint32_t n, double eta, double *out);

/**
 * SE floor (1−η)/(4η)·d²/N.
 *
 * # Safety
 * `out` must be valid.
 */
enum MpStatus mp_se_asymptotic(uint32_t d, uint32_t n, double eta, double *out);

/**
 * Large-N generalized N00N bound and its gauge. `out_delta` is optional.
 *
 * # Safety
 * `out_value` must be valid.
 */
enum MpStatus mp_psi_s_asymptotic(uint32_t d,
                                  uint32_t n,
                                  double eta,
                                  double *out_value,
                                  double *out_delta);

/**
 * Loss regime of an N-photon probe at transmissivity `eta`.
 *
 * # Safety
 * `out` must be valid.
 */
enum MpStatus mp_regime(uint32_t n, double eta, enum MpRegime *out);

/**
 * Message for the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIPHASE_H */
