////////////////////////////////////////////////////////////////////////////////
//                                                                            //
//  This file is part of fermichip                                            //
//                                                                            //
//  Copyright 2026 fermichip developers                                       //
//                                                                            //
//  Licensed under the Apache License, Version 2.0 (the "License");           //
//  you may not use this file except in compliance with the License.          //
//  You may obtain a copy of the License at                                   //
//                                                                            //
//      http://www.apache.org/licenses/LICENSE-2.0                            //
//                                                                            //
//  Unless required by applicable law or agreed to in writing, software       //
//  distributed under the License is distributed on an "AS IS" BASIS,         //
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.  //
//  See the License for the specific language governing permissions and       //
//  limitations under the License.                                            //
//                                                                            //
////////////////////////////////////////////////////////////////////////////////

#ifndef FERMICHIP_H
#define FERMICHIP_H

/*
 * C interface of the fermichip library: ideal Fermi gases in atom-chip
 * microtraps. All quantities are SI (J, K, T, m, s, rad/s) unless a name
 * says otherwise; unit conversion belongs to the caller.
 *
 * Every function returns an fc_status. On failure the message is kept per
 * thread and can be read with fc_last_error() until the next call on that
 * thread. Objects are opaque handles released with their *_free function;
 * strings handed out by the library are released with fc_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FERMICHIP_BUILDING_LIBRARY)
#    define FC_API __declspec(dllexport)
#  else
#    define FC_API __declspec(dllimport)
#  endif
#else
#  define FC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fc_status {
  FC_OK = 0,
  FC_ERR_DOMAIN = 1,
  FC_ERR_CONVERGENCE = 2,
  FC_ERR_INVALID_ARGUMENT = 3,
  FC_ERR_IO = 4,
  FC_ERR_PARSE = 5,
  FC_ERR_NOT_A_TRAP = 6,
  FC_ERR_RWA_VIOLATION = 7,
  FC_ERR_AMBIGUOUS = 8,
  FC_ERR_INTERNAL = 99
} fc_status;

FC_API const char* fc_version(void);
FC_API const char* fc_status_name(fc_status);
FC_API const char* fc_last_error(void);
FC_API void fc_string_free(char*);

/* ---- species ---------------------------------------------------------- */

typedef struct fc_species_registry fc_species_registry;
typedef struct fc_spin_state fc_spin_state;

FC_API fc_status fc_species_builtin(fc_species_registry** out);
FC_API fc_status fc_species_load(const char* path, fc_species_registry** out);
FC_API void fc_species_free(fc_species_registry*);

/* m_F is passed doubled (9/2 -> 9). */
FC_API fc_status fc_spin_state_create(const fc_species_registry*, const char* species, int twice_m_F,
                                      fc_spin_state** out);
FC_API fc_status fc_spin_state_stretched(const fc_species_registry*, const char* species, fc_spin_state** out);
FC_API void fc_spin_state_free(fc_spin_state*);

typedef struct fc_spin_info {
  double mass;               /* kg */
  int twice_F;
  int twice_m_F;
  long g_F_num;
  long g_F_den;
  double magnetic_moment;    /* m_F g_F mu_B, J/T */
  int trappable;
  int has_scattering_length;
  double scattering_length;  /* m */
} fc_spin_info;

FC_API fc_status fc_spin_state_info(const fc_spin_state*, fc_spin_info* out);
FC_API fc_status fc_spin_state_label(const fc_spin_state*, char** out);

/* ---- special functions ------------------------------------------------ */

FC_API fc_status fc_fermi_fn(double n, double z, double* out);
FC_API fc_status fc_fermi_fn_log(double n, double log_z, double* out);
FC_API fc_status fc_bose_fn(double n, double z, double* out);

/* ---- thermodynamics --------------------------------------------------- */

typedef struct fc_trap {
  double omega_x;   /* rad/s */
  double omega_y;
  double omega_z;
} fc_trap;

typedef enum fc_mu_regime { FC_MU_LOW = 0, FC_MU_HIGH = 1 } fc_mu_regime;

FC_API fc_status fc_log_fugacity_from_reduced_temperature(double t_over_tf, double* log_z);
FC_API fc_status fc_reduced_temperature_from_log_fugacity(double log_z, double* t_over_tf);
FC_API fc_status fc_chemical_potential_approx(double t_over_tf, fc_mu_regime, double* mu_over_ef);
FC_API fc_status fc_chemical_potential_exact(double t_over_tf, double* mu_over_ef);
FC_API fc_status fc_fermi_energy(double N, fc_trap, double* E_F);

/* Brute-force level sums. cutoff 0 picks the smallest valid one;
 * ground_state_origin measures energies from the ground level. */
FC_API fc_status fc_discrete_sums(fc_trap, double mu, double T, long cutoff, int ground_state_origin, double* N,
                                  double* E);

FC_API fc_status fc_capacity_1d(fc_trap, double* ratio, long* whole_atoms);

typedef struct fc_gas fc_gas;

FC_API fc_status fc_gas_create(const fc_spin_state*, fc_trap, double N, double T, fc_gas** out);
FC_API fc_status fc_gas_from_reduced_temperature(const fc_spin_state*, fc_trap, double N, double t_over_tf,
                                                 fc_gas** out);
FC_API void fc_gas_free(fc_gas*);

typedef struct fc_gas_summary {
  double N;
  double T;                  /* K */
  double log_z;
  double E_F;                /* J */
  double T_F;                /* K */
  double t_over_tf;
  double mu;                 /* J */
  double energy_per_particle;/* J */
  double degeneracy;         /* n0 Lambda^3 */
  double thermal_wavelength; /* m */
  double peak_density;       /* m^-3 */
  double tf_radius[3];       /* m */
} fc_gas_summary;

FC_API fc_status fc_gas_summary_get(const fc_gas*, fc_gas_summary* out);
FC_API fc_status fc_gas_json(const fc_gas*, char** out);

/* CSV: T_over_TF,Z,mu_over_EF,E_per_N_over_EF,n0_lambda3 */
FC_API fc_status fc_thermo_scan_csv(const double* t_over_tf, size_t n, unsigned jobs, char** out);

/* ---- densities and time of flight ------------------------------------- */

FC_API fc_status fc_density_finite_t(const fc_gas*, const double r[3], double* out);
FC_API fc_status fc_density_zero_t(const fc_gas*, const double r[3], double* out);
FC_API fc_status fc_uniform_density_zero_t(double E_F, double mass, double* out);
FC_API fc_status fc_tof_rescale(fc_trap, double t, fc_trap* rescaled, double* normalization);
FC_API fc_status fc_column_density(const fc_gas*, double t, double x, double y, int boltzmann, double* out);

typedef struct fc_raster fc_raster;

typedef struct fc_raster_info {
  uint32_t nx;
  uint32_t ny;
  double pitch_x;   /* m */
  double pitch_y;
} fc_raster_info;

/* n x n column-density image over +-span cloud radii. */
FC_API fc_status fc_column_profile(const fc_gas*, double t, uint32_t n, double span, int boltzmann, unsigned jobs,
                                   fc_raster** out);
FC_API fc_status fc_raster_get_info(const fc_raster*, fc_raster_info* out);
FC_API const double* fc_raster_values(const fc_raster*);
FC_API fc_status fc_raster_integral(const fc_raster*, double* out);
FC_API fc_status fc_raster_write_binary(const fc_raster*, const char* path);
FC_API fc_status fc_raster_read_binary(const char* path, fc_raster** out);
FC_API fc_status fc_raster_write_csv(const fc_raster*, const char* path);
FC_API void fc_raster_free(fc_raster*);

/* ---- magnetic traps --------------------------------------------------- */

typedef struct fc_field fc_field;

FC_API fc_status fc_field_load(const char* path, fc_field** out);
FC_API fc_status fc_field_from_json(const char* text, fc_field** out);
/* Ioffe-Pritchard model centred at the origin, axial axis y. */
FC_API fc_status fc_field_ioffe_pritchard(double B0, double gradient, double curvature, fc_field** out);
FC_API void fc_field_free(fc_field*);
FC_API fc_status fc_field_at(const fc_field*, const double r[3], double B[3]);
FC_API fc_status fc_ip_gradient_from_frequency(const fc_spin_state*, double B0, double omega, double* gradient);

typedef struct fc_trap_report {
  double position[3];        /* m */
  double B0;                 /* T */
  int zero_field;
  double omega[3];           /* rad/s, by nearest lab axis */
  double depth;              /* J, inf when no barrier was found */
  double depth_direction[3];
  int has_ip;                /* IP fit available */
  double ip_B0;
  double ip_gradient;        /* T/m */
  double ip_curvature;       /* T/m^2 */
  double ip_residual;        /* relative to B0 */
} fc_trap_report;

/* seed may be NULL: the geometry's own seed, else the origin. */
FC_API fc_status fc_field_analyze(const fc_field*, const fc_spin_state*, const double* seed, fc_trap_report* out);
FC_API fc_status fc_trap_report_json(const fc_field*, const fc_spin_state*, const double* seed, char** out);

/* ---- RF dressing ------------------------------------------------------ */

typedef struct fc_rf_setup {
  double amplitude;          /* T */
  double omega;              /* rad/s, final frequency */
  double connect_omega;      /* rad/s, where branches are assigned */
  double polarization[3];
  double axis_origin[3];     /* m */
  double axis_direction[3];
  double s_min;              /* m */
  double s_max;
  uint64_t samples;
} fc_rf_setup;

typedef struct fc_dressing fc_dressing;

/* Named scenario ("rb-doublewell", "k-doublewell") with its own IP trap,
 * run for the Rb87 and K40 stretched states. */
FC_API fc_status fc_dress_scenario(const char* name, unsigned jobs, fc_dressing** out);
FC_API fc_status fc_dress_scenario_setup(const char* name, fc_rf_setup* rf, double* B0, double* gradient,
                                         double* curvature);
FC_API fc_status fc_dress_run(const fc_field*, const fc_rf_setup*, const fc_spin_state* const* states, size_t n,
                              unsigned jobs, fc_dressing** out);
FC_API void fc_dressing_free(fc_dressing*);
FC_API fc_status fc_dressing_count(const fc_dressing*, size_t* n);

typedef struct fc_dressing_summary {
  int twice_m_F_prime;
  double delta_connect;      /* J, at the axis origin */
  double delta_origin;       /* J, final frequency */
  double omega_origin;       /* J, Rabi energy */
  int topology;              /* 1 single, 2 double, 0 ambiguous */
  double separation;         /* m */
  double barrier;            /* J */
  int rwa_warning;
} fc_dressing_summary;

FC_API fc_status fc_dressing_summary_get(const fc_dressing*, size_t i, fc_dressing_summary* out);
/* CSV: s_m,U_J,delta_J,Omega_J,U_over_h_Hz */
FC_API fc_status fc_dressing_scan_csv(const fc_dressing*, size_t i, char** out);
FC_API fc_status fc_dressing_report_json(const fc_dressing*, char** out);

FC_API fc_status fc_rf_knife_depth(const fc_spin_state*, double B0, double omega_rf, double* depth, int* engaged);
FC_API fc_status fc_eta_relation(const fc_spin_state* K, const fc_spin_state* Rb, double eta_Rb, double B0, double T,
                                 double* eta_K);
FC_API fc_status fc_eta_min_over_sublevels(const fc_spin_state* K, const fc_spin_state* Rb, double eta_Rb, double B0,
                                           double T, double* eta_K, int* twice_m_F);
FC_API fc_status fc_k_only_evaporation_depth(const fc_spin_state* K, const fc_spin_state* Rb, double B0, double* depth);

/* ---- evaporation ------------------------------------------------------ */

typedef enum fc_volume_kind {
  FC_VOLUME_SHO = 0,
  FC_VOLUME_QUADRUPOLE = 1,
  FC_VOLUME_BOX = 2,
  FC_VOLUME_QUAD2D_BOX = 3
} fc_volume_kind;

typedef struct fc_volume_model {
  fc_volume_kind kind;
  double omega_bar;          /* rad/s */
  double mean_gradient;      /* J/m */
  double side;               /* m */
  double mass;               /* kg */
} fc_volume_model;

FC_API fc_status fc_effective_volume(const fc_volume_model*, double T, double* out);
FC_API fc_status fc_max_loadable_atoms(const fc_volume_model*, double rho0, double depth, double eta, double mass,
                                       double* out);
FC_API fc_status fc_collision_rate(double mass, double rho0, double T, double sigma, double* out);
FC_API fc_status fc_min_start_temperature(double mass, double rho0, double gamma_min, double a_s, double* out);
FC_API fc_status fc_sigma_swave(double a, double k, double* out);
FC_API fc_status fc_current_scaling_exponent(double bias_exponent, double axial_exponent, double* out);

/* JSON report of a named loading scenario (libbrecht-loop, ioffe-c,
 * reichel-z, toronto-z); NULL name lists them. */
FC_API fc_status fc_evap_preset_json(const char* name, char** out);

/* ---- image fits ------------------------------------------------------- */

typedef struct fc_image fc_image;
typedef struct fc_fit fc_fit;

typedef enum fc_fit_model { FC_FIT_GAUSSIAN = 0, FC_FIT_FERMI_DIRAC = 1 } fc_fit_model;

/* noise_fraction is the RMS relative to the noiseless peak; n = 0 gives 128.
 * The window spans +-2 cloud radii. */
FC_API fc_status fc_image_synthesize(const fc_gas*, double t, uint32_t n, double noise_fraction, uint64_t seed,
                                     fc_image** out);
FC_API fc_status fc_image_from_raster(const fc_raster*, double noise_rms, fc_image** out);
/* Trap, mass and expansion time, needed for apparent temperatures. */
FC_API fc_status fc_image_set_context(fc_image*, fc_trap, double mass, double t);
FC_API fc_status fc_image_raster(const fc_image*, fc_raster** out);
FC_API void fc_image_free(fc_image*);

typedef struct fc_fit_summary {
  fc_fit_model model;
  double N;
  double r_x;                /* m */
  double r_y;
  double x0;
  double y0;
  int has_log_z;
  double log_z;
  double log_z_sigma;
  double t_over_tf;
  double chi2;
  double reduced_chi2;
  long dof;
  int z_poorly_constrained;
  int z_at_bound;
} fc_fit_summary;

FC_API fc_status fc_fit_run(const fc_image*, fc_fit_model, int numeric_jacobian, fc_fit** out);
FC_API fc_status fc_fit_summary_get(const fc_fit*, fc_fit_summary* out);
FC_API fc_status fc_fit_json(const fc_fit*, char** out);
FC_API fc_status fc_fit_residual(const fc_fit*, const fc_image*, fc_raster** out);
FC_API void fc_fit_free(fc_fit*);
/* Gaussian fit of an image that carries a context. */
FC_API fc_status fc_apparent_temperature(const fc_fit* gaussian, const fc_image*, double* T_app);
FC_API fc_status fc_apparent_temperature_ratio(double t_over_tf, double* ratio);

/* ---- regression suite ------------------------------------------------- */

FC_API fc_status fc_acceptance_criteria(int* ids, size_t capacity, size_t* count);
/* ids NULL runs everything. all_pass may be NULL. */
FC_API fc_status fc_acceptance_run_json(const int* ids, size_t n, unsigned jobs, char** out, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif
