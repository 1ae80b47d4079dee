#ifndef CAPRES_H
#define CAPRES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum CapresStatus {
  CAPRES_STATUS_OK = 0,
  // A required pointer argument was null.
  CAPRES_STATUS_NULL_ARGUMENT = 1,
  // Text was not UTF-8 or the configuration was rejected.
  CAPRES_STATUS_INVALID_CONFIG = 2,
  // Argument outside its documented range.
  CAPRES_STATUS_INVALID_ARGUMENT = 3,
  // A numerical stage failed.
  CAPRES_STATUS_COMPUTE_ERROR = 4,
  // An index past the end of a list.
  CAPRES_STATUS_OUT_OF_RANGE = 5,
  // Internal panic caught at the boundary.
  CAPRES_STATUS_PANIC = 6,
} CapresStatus;

// List of complex numbers, e.g. resonances or eigenvalues.
typedef struct CapresComplexList CapresComplexList;

// Parsed and validated run configuration.
typedef struct CapresConfig CapresConfig;

// Complex scaling contour.
typedef struct CapresContour CapresContour;

// Outcome of a DtN count.
typedef struct CapresDtnCount {
  int64_t winding;
  uint64_t projection_rank;
  double interface;
  uint64_t samples;
} CapresDtnCount;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *capres_last_error(void);

// Parses configuration text in the `section.key = value` format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a writable pointer.
enum CapresStatus capres_config_parse(const char *text, struct CapresConfig **out);

// Hex digest of the configuration's canonical form. Valid while `config` lives.
//
// # Safety
// `config` must come from [`capres_config_parse`] or be null.
const char *capres_config_digest(const struct CapresConfig *config);

// # Safety
// `config` must come from [`capres_config_parse`] or be null; it is freed once.
void capres_config_free(struct CapresConfig *config);

// Builds the scaling contour for angle `theta`, start `r1` and bound `alpha0`.
//
// # Safety
// `out` must be a writable pointer.
enum CapresStatus capres_contour_new(double theta,
                                     double r1,
                                     double alpha0,
                                     struct CapresContour **out);

// Writes `g(t)` and `g'(t)` as real/imaginary pairs.
//
// # Safety
// `contour` must be a live handle; `g` and `dg` must each point to two doubles.
enum CapresStatus capres_contour_eval(const struct CapresContour *contour,
                                      double t,
                                      double *g,
                                      double *dg);

// # Safety
// `contour` must be a live handle or null; it is freed once.
void capres_contour_free(struct CapresContour *contour);

// Oracle resonance energies in the rectangle, sorted by real part.
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum CapresStatus capres_oracle_find(const struct CapresConfig *config,
                                     double re_min,
                                     double re_max,
                                     double im_min,
                                     double im_max,
                                     struct CapresComplexList **out);

// All eigenvalues of the scaled operator at `contour.theta` and
// `scaling.epsilon`, sorted by real part.
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum CapresStatus capres_scaling_eigenvalues(const struct CapresConfig *config,
                                             struct CapresComplexList **out);

// DtN winding number around the configured `dtn` circle, with the
// projection rank of the scaled operator for comparison.
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum CapresStatus capres_dtn_count(const struct CapresConfig *config, struct CapresDtnCount *out);

// Number of entries; zero for a null list.
//
// # Safety
// `list` must be a live handle or null.
uintptr_t capres_list_len(const struct CapresComplexList *list);

// Writes entry `index` to `re` and `im`.
//
// # Safety
// `list` must be a live handle; `re` and `im` writable pointers.
enum CapresStatus capres_list_get(const struct CapresComplexList *list,
                                  uintptr_t index,
                                  double *re,
                                  double *im);

// # Safety
// `list` must be a live handle or null; it is freed once.
void capres_list_free(struct CapresComplexList *list);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPRES_H */
