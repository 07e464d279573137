/*
 * Copyright 2026 The pcn Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the predictive coding library.
 *
 * Every function returns a pcn_status. On failure a description is kept in
 * thread-local storage and can be read with pcn_last_error() until the next
 * call on the same thread. Handles are opaque and owned by the caller.
 *
 * Vectors are passed as (pointer, length) pairs; a length that does not
 * match the layer is a PCN_ERR_SHAPE. Weight matrices are row-major with
 * width(layer) rows and width(layer + 1) columns.
 */

#ifndef PCN_PCN_H
#define PCN_PCN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PCN_BUILDING_LIBRARY)
#define PCN_API __declspec(dllexport)
#else
#define PCN_API __declspec(dllimport)
#endif
#else
#define PCN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcn_status {
  PCN_OK = 0,
  PCN_ERR_CONFIG = 1,
  PCN_ERR_DATA = 2,
  PCN_ERR_SHAPE = 3,
  PCN_ERR_NUMERIC = 4,
  PCN_ERR_ARGUMENT = 5,
  PCN_ERR_INTERNAL = 6
} pcn_status;

typedef struct pcn_network pcn_network;
typedef struct pcn_result pcn_result;

PCN_API const char* pcn_version(void);

/* Message of the last failure on this thread ("" when none). */
PCN_API const char* pcn_last_error(void);

/* Offending config key of the last PCN_ERR_CONFIG ("" otherwise). */
PCN_API const char* pcn_last_error_field(void);

/* ---- networks ---------------------------------------------------------- */

/* `activations` has num_layers - 1 entries ("identity" or "tanh"), one per
 * layer that receives a prediction, bottom first. */
PCN_API pcn_status pcn_network_create(const size_t* widths, size_t num_layers,
                                      const char* const* activations, uint64_t seed,
                                      pcn_network** out);
PCN_API void pcn_network_destroy(pcn_network* net);

PCN_API pcn_status pcn_network_num_layers(const pcn_network* net, size_t* out);
PCN_API pcn_status pcn_network_width(const pcn_network* net, size_t layer, size_t* out);

PCN_API pcn_status pcn_network_get_mu(const pcn_network* net, size_t layer, double* out,
                                      size_t len);
PCN_API pcn_status pcn_network_set_mu(pcn_network* net, size_t layer, const double* values,
                                      size_t len);
PCN_API pcn_status pcn_network_get_sigma(const pcn_network* net, size_t layer, double* out,
                                         size_t len);
PCN_API pcn_status pcn_network_set_sigma(pcn_network* net, size_t layer,
                                         const double* values, size_t len);
PCN_API pcn_status pcn_network_get_theta(const pcn_network* net, size_t layer, double* out,
                                         size_t len);
PCN_API pcn_status pcn_network_set_theta(pcn_network* net, size_t layer,
                                         const double* values, size_t len);
/* Errors of the last pcn_network_compute_errors; the top layer has none. */
PCN_API pcn_status pcn_network_get_epsilon(const pcn_network* net, size_t layer,
                                           double* out, size_t len);

PCN_API pcn_status pcn_network_clamp(pcn_network* net, size_t layer, const double* values,
                                     size_t len);
PCN_API pcn_status pcn_network_unclamp(pcn_network* net, size_t layer);

PCN_API pcn_status pcn_network_compute_errors(pcn_network* net);
PCN_API pcn_status pcn_network_free_energy(const pcn_network* net, double* out);

/* Descent directions. Errors must be current. */
PCN_API pcn_status pcn_network_activity_gradient(const pcn_network* net, size_t layer,
                                                 double* out, size_t len);
PCN_API pcn_status pcn_network_weight_gradient(const pcn_network* net, size_t layer,
                                               double* out, size_t len);

/* One synchronous activity update of all unclamped layers at rate eta_mu
 * followed by a recomputation of the errors. */
PCN_API pcn_status pcn_network_step_activities(pcn_network* net, double eta_mu);

/* sigma' = max(sigma + eta_sigma (eps^2 - sigma), 1e-6) for every layer that
 * receives a prediction. */
PCN_API pcn_status pcn_network_step_variances(pcn_network* net, double eta_sigma);

/* ---- experiments ------------------------------------------------------- */

/* Runs one experiment or diagnostic. `config_json` may be NULL or "" for the
 * defaults; it may omit "experiment". Outputs are written under the
 * configured out_dir. */
PCN_API pcn_status pcn_run(const char* experiment, const char* config_json, pcn_result** out);

/* Resolves defaults plus `config_json` and validates the result. The string
 * returned in *out_json must be released with pcn_string_free. */
PCN_API pcn_status pcn_config_resolve(const char* experiment, const char* config_json,
                                      char** out_json);
PCN_API void pcn_string_free(char* s);

/* Borrowed strings, valid until pcn_result_destroy. */
PCN_API const char* pcn_result_summary_json(const pcn_result* result);
PCN_API const char* pcn_result_out_dir(const pcn_result* result);
PCN_API double pcn_result_wall_seconds(const pcn_result* result);
PCN_API pcn_status pcn_result_metric(const pcn_result* result, const char* name, double* out);
PCN_API void pcn_result_destroy(pcn_result* result);

#ifdef __cplusplus
}
#endif

#endif /* PCN_PCN_H */
