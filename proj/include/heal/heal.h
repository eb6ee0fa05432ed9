/* C interface to the heal library. Strings returned through char** out
   parameters are owned by the caller and released with heal_string_free. */
#ifndef HEAL_HEAL_H
#define HEAL_HEAL_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(HEAL_BUILDING_LIBRARY)
#    define HEAL_API __declspec(dllexport)
#  else
#    define HEAL_API __declspec(dllimport)
#  endif
#else
#  define HEAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum heal_status {
  HEAL_OK = 0,
  HEAL_ERR_INVALID_ARGUMENT = 1,
  HEAL_ERR_RANGE = 2,
  HEAL_ERR_NUMERICAL = 3,
  HEAL_ERR_IO = 4,
  HEAL_ERR_INTERNAL = 5
} heal_status;

typedef struct heal_hypergraph heal_hypergraph;

HEAL_API const char* heal_version(void);

/* Message of the last failed call on this thread, or "" after a success. */
HEAL_API const char* heal_last_error(void);

HEAL_API void heal_string_free(char* s);

/* edge_offsets has num_edges + 1 entries indexing into members. */
HEAL_API heal_status heal_hypergraph_create(size_t num_nodes, size_t num_edges, const size_t* edge_offsets,
                                            const size_t* members, heal_hypergraph** out);
HEAL_API heal_status heal_hypergraph_parse(const char* text, heal_hypergraph** out);
HEAL_API heal_status heal_hypergraph_load(const char* path, heal_hypergraph** out);
HEAL_API heal_status heal_hypergraph_save(const heal_hypergraph* h, const char* path);
HEAL_API heal_status heal_hypergraph_to_text(const heal_hypergraph* h, char** out);
HEAL_API void heal_hypergraph_destroy(heal_hypergraph* h);

HEAL_API heal_status heal_hypergraph_counts(const heal_hypergraph* h, size_t* num_nodes, size_t* num_edges);
/* node_degrees holds num_nodes entries, edge_degrees num_edges; either may be NULL. */
HEAL_API heal_status heal_hypergraph_degrees(const heal_hypergraph* h, size_t* node_degrees, size_t* edge_degrees);

/* kind is "node" or "edge". out receives the row-major square matrix. */
HEAL_API heal_status heal_laplacian(const heal_hypergraph* h, const char* kind, double* out, size_t capacity);
/* Ascending eigenvalues of the chosen Laplacian. */
HEAL_API heal_status heal_spectrum(const heal_hypergraph* h, const char* kind, double* out, size_t capacity);
HEAL_API heal_status heal_cheeger_json(const heal_hypergraph* h, char** out);

/* config_json may be NULL. text receives the primary output and summary the
   secondary one; either pointer may be NULL. */
HEAL_API heal_status heal_run_command(const char* command, const char* config_json, char** text, char** summary);
HEAL_API heal_status heal_command_defaults(const char* command, char** out);

/* topology is hes, hep, her or hed. */
HEAL_API heal_status heal_generate(const char* topology, size_t n, size_t m, unsigned long long seed,
                                   heal_hypergraph** out);

#ifdef __cplusplus
}
#endif

#endif
