/*
 * transport_pinn: physics-informed network solver for slab linear transport.
 *
 * Plain C interface over the C++ core. Every call returns a tpn_status;
 * on failure tpn_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread). Handles are opaque and
 * owned by the caller, who releases them with the matching *_free.
 */
#ifndef TRANSPORT_PINN_H
#define TRANSPORT_PINN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TPN_BUILDING_LIBRARY)
#    define TPN_API __declspec(dllexport)
#  else
#    define TPN_API __declspec(dllimport)
#  endif
#else
#  define TPN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpn_status {
  TPN_OK = 0,
  TPN_ERR_INVALID_ARGUMENT = 1,
  TPN_ERR_INVALID_CONFIG = 2,
  TPN_ERR_NON_FINITE = 3,
  TPN_ERR_NOT_CONVERGED = 4,
  TPN_ERR_GRID_MISMATCH = 5,
  TPN_ERR_IO = 6,
  TPN_ERR_INTERNAL = 7
} tpn_status;

typedef struct tpn_config tpn_config;
typedef struct tpn_network tpn_network;

TPN_API const char* tpn_version(void);
TPN_API const char* tpn_last_error(void);

/* Worker count used when a call takes threads <= 0:
 * TRANSPORT_PINN_THREADS if set, else all hardware threads. */
TPN_API int tpn_default_threads(void);

/* ---- run configuration ------------------------------------------------ */

TPN_API tpn_status tpn_config_load(const char* path, tpn_config** out);
TPN_API tpn_status tpn_config_parse(const char* text, tpn_config** out);
/* Overrides one key with the file syntax, then revalidates. */
TPN_API tpn_status tpn_config_set(tpn_config* config, const char* key, const char* value);
TPN_API void tpn_config_free(tpn_config* config);

/* ---- commands ----------------------------------------------------------- */

/* Writes history.csv, timing.csv, checkpoint_<step>.ckpt and final.ckpt. */
TPN_API tpn_status tpn_train(const tpn_config* config, const char* out_dir, int threads);
/* Writes psi_<t>.csv and rho_<t>.csv for every configured output time. */
TPN_API tpn_status tpn_eval(const tpn_config* config, const char* checkpoint, const char* out_dir);
TPN_API tpn_status tpn_reference(const tpn_config* config, const char* out_dir);
/* ref_dir may be NULL to compare against the exact solution (config
 * required then). Writes errors.csv. */
TPN_API tpn_status tpn_compare(const tpn_config* config, const char* dnn_dir, const char* ref_dir, const char* out_dir);

/* ---- networks ----------------------------------------------------------- */

TPN_API tpn_status tpn_network_init(const int* layer_sizes, size_t count, uint64_t seed, tpn_network** out);
TPN_API tpn_status tpn_network_load(const char* path, tpn_network** out);
TPN_API tpn_status tpn_network_save(const tpn_network* network, const char* path);
TPN_API size_t tpn_network_num_parameters(const tpn_network* network);
TPN_API tpn_status tpn_network_forward(const tpn_network* network, double t, double x, double mu, double* value);
/* jet = {value, d/dt, d/dx, d/dmu} */
TPN_API tpn_status tpn_network_forward_jet(const tpn_network* network, double t, double x, double mu, double jet[4]);
TPN_API void tpn_network_free(tpn_network* network);

/* ---- quadrature --------------------------------------------------------- */

/* Fills n nodes (ascending) and weights of the Gauss-Legendre rule. */
TPN_API tpn_status tpn_gauss_legendre(int n, double* nodes, double* weights);

#ifdef __cplusplus
}
#endif

#endif /* TRANSPORT_PINN_H */
