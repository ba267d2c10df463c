/* C interface to the fracmgrit solver library. All handles are opaque; every
 * call that can fail returns an fm_status and leaves a message retrievable
 * with fm_last_error() on the calling thread. Strings returned through char**
 * out-parameters are owned by the caller and released with fm_string_free. */
#ifndef FRACMGRIT_H
#define FRACMGRIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(FRACMGRIT_BUILDING_LIBRARY)
#define FM_API __attribute__((visibility("default")))
#else
#define FM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fm_status {
  FM_OK = 0,
  FM_INVALID_ARGUMENT = 1,
  FM_CONVERGENCE_FAILURE = 2,
  FM_NUMERICAL_BREAKDOWN = 3,
  FM_CAP_EXCEEDED = 4,
  FM_INSUFFICIENT_DATA = 5,
  FM_INVARIANT_VIOLATION = 6,
  FM_IO = 7,
  FM_INTERNAL = 99
} fm_status;

enum { FM_MESH_UNIFORM = 0, FM_MESH_SHISHKIN = 1 };
enum { FM_SOURCE_MANUFACTURED = 0, FM_SOURCE_ZERO = 1 };
enum { FM_SOLVER_SEQUENTIAL = 0, FM_SOLVER_PARAREAL = 1, FM_SOLVER_MGRIT = 2 };
enum { FM_RELAX_FCF = 0, FM_RELAX_F = 1 };

typedef struct fm_problem_desc {
  double beta;
  double gamma;
  double kx;
  double ky;
  double final_time;
  int m_beta;
  int m_gamma;
  int n_time;
  int mesh_kind;
  double epsilon;
  /* FM_SOURCE_MANUFACTURED: the polynomial-bubble test problem (unit square
   * only); FM_SOURCE_ZERO: zero source and initial data. */
  int source_kind;
  double cg_tol;
  int cg_jacobi;
  /* Triangle rule for the load vector, NULL for the default. */
  const char* load_rule;
} fm_problem_desc;

typedef struct fm_problem fm_problem;
typedef struct fm_solution fm_solution;

typedef struct fm_solver_options {
  int solver;
  int m;
  int max_levels;
  int min_coarse;
  double halt_tol;
  int max_iters;
  int relaxation;
  int skip_first_down;
  uint64_t seed;
  int random_initial_guess;
  int fixed_iterations;
  int workers;
  int record_wall_time;
  /* Evaluate the full space-time residual of the result (one solve per point). */
  int compute_residual;
} fm_solver_options;

FM_API void fm_problem_desc_default(fm_problem_desc* desc);
FM_API fm_status fm_problem_create(const fm_problem_desc* desc, fm_problem** out);
FM_API void fm_problem_destroy(fm_problem* problem);
FM_API size_t fm_problem_unknowns(const fm_problem* problem);

FM_API void fm_solver_options_default(fm_solver_options* opts);
FM_API fm_status fm_solve(fm_problem* problem, const fm_solver_options* opts, fm_solution** out);
FM_API void fm_solution_destroy(fm_solution* solution);
FM_API int fm_solution_time_points(const fm_solution* solution);
FM_API fm_status fm_solution_values(const fm_solution* solution, int time_index, double* out,
                                    size_t len);
/* NaN when unavailable. */
FM_API double fm_solution_l2_error(const fm_solution* solution);
FM_API double fm_solution_residual(const fm_solution* solution);
FM_API double fm_solution_convergence_factor(const fm_solution* solution);
FM_API int fm_solution_iterations(const fm_solution* solution);
FM_API uint64_t fm_solution_spatial_solves(const fm_solution* solution);
FM_API fm_status fm_solution_report(const fm_solution* solution, char** json);

/* Two-level bound for coarsening factor m on the problem's mesh. */
FM_API fm_status fm_predict(fm_problem* problem, int m, int per_mode, double* bound, char** json);

/* which: "mass", "stiffness-x", "stiffness-y", "step-implicit", "step-explicit". */
FM_API fm_status fm_dump_operator(fm_problem* problem, const char* which, size_t cap, char** csv);

typedef struct fm_table_desc {
  double kx;
  double ky;
  int mesh_kind;
  double epsilon;
  size_t n_pairs;
  const double* betas;
  const double* gammas;
  size_t n_rows;
  const int* m_space;
  const int* n_time;
  const char* error_rule;
  const char* load_rule;
  int workers;
} fm_table_desc;

FM_API fm_status fm_run_table(const fm_table_desc* desc, char** csv, char** json);

typedef struct fm_factor_desc {
  double kx;
  double ky;
  int mesh_kind;
  double epsilon;
  size_t n_columns;
  const double* betas;
  const double* gammas;
  const int* m;
  size_t n_rows;
  const int* m_space;
  const int* n_time;
  int iterations;
  uint64_t seed;
  /* Rows beyond these sizes are reported as skipped (0 = no limit). */
  int max_space;
  int max_time;
  int workers;
} fm_factor_desc;

FM_API fm_status fm_factor_study(const fm_factor_desc* desc, char** csv, char** json);

FM_API fm_status fm_selftest(int inject_fault, char** report, int* failures);

FM_API void fm_string_free(char* s);
FM_API const char* fm_last_error(void);
FM_API const char* fm_status_string(fm_status status);
FM_API const char* fm_version(void);

#ifdef __cplusplus
}
#endif

#endif
