#include "heal/heal.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "heal/error.hpp"
#include "heal/experiments.hpp"
#include "heal/hypergraph.hpp"
#include "heal/spectral.hpp"
#include "heal/synth.hpp"
#include "json.hpp"

struct heal_hypergraph {
  heal::Hypergraph h;
};

namespace {

thread_local std::string g_last_error;

heal_status to_status(heal::ErrorKind k) {
  switch (k) {
    case heal::ErrorKind::InvalidArgument: return HEAL_ERR_INVALID_ARGUMENT;
    case heal::ErrorKind::Range: return HEAL_ERR_RANGE;
    case heal::ErrorKind::Numerical: return HEAL_ERR_NUMERICAL;
    case heal::ErrorKind::Io: return HEAL_ERR_IO;
  }
  return HEAL_ERR_INTERNAL;
}

template <typename F>
heal_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return HEAL_OK;
  } catch (const heal::HealError& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return HEAL_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) heal::fail(heal::ErrorKind::InvalidArgument, std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

heal::DenseMatrix laplacian_of(const heal_hypergraph* h, const char* kind) {
  need(h, "hypergraph");
  need(kind, "kind");
  const std::string k = kind;
  if (k == "node") return heal::node_laplacian(h->h);
  if (k == "edge") return heal::edge_laplacian(h->h);
  heal::fail(heal::ErrorKind::InvalidArgument, "laplacian kind must be node or edge");
}

void wrap(heal::Hypergraph g, heal_hypergraph** out) { *out = new heal_hypergraph{std::move(g)}; }

}  // namespace

extern "C" {

const char* heal_version(void) { return "0.1.0"; }

const char* heal_last_error(void) { return g_last_error.c_str(); }

void heal_string_free(char* s) { std::free(s); }

heal_status heal_hypergraph_create(size_t num_nodes, size_t num_edges, const size_t* edge_offsets,
                                   const size_t* members, heal_hypergraph** out) {
  return guarded([&] {
    need(edge_offsets, "edge_offsets");
    need(out, "out");
    if (edge_offsets[num_edges] > 0) need(members, "members");
    std::vector<std::vector<std::size_t>> edges(num_edges);
    for (size_t e = 0; e < num_edges; ++e) {
      if (edge_offsets[e + 1] < edge_offsets[e])
        heal::fail(heal::ErrorKind::InvalidArgument, "edge_offsets must be non-decreasing");
      edges[e].assign(members + edge_offsets[e], members + edge_offsets[e + 1]);
    }
    wrap(heal::build_hypergraph(std::move(edges), num_nodes), out);
  });
}

heal_status heal_hypergraph_parse(const char* text, heal_hypergraph** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    wrap(heal::parse_hypergraph(text), out);
  });
}

heal_status heal_hypergraph_load(const char* path, heal_hypergraph** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    wrap(heal::load_hypergraph(path), out);
  });
}

heal_status heal_hypergraph_save(const heal_hypergraph* h, const char* path) {
  return guarded([&] {
    need(h, "hypergraph");
    need(path, "path");
    heal::save_hypergraph(h->h, path);
  });
}

heal_status heal_hypergraph_to_text(const heal_hypergraph* h, char** out) {
  return guarded([&] {
    need(h, "hypergraph");
    need(out, "out");
    *out = copy_string(heal::format_hypergraph(h->h));
  });
}

void heal_hypergraph_destroy(heal_hypergraph* h) { delete h; }

heal_status heal_hypergraph_counts(const heal_hypergraph* h, size_t* num_nodes, size_t* num_edges) {
  return guarded([&] {
    need(h, "hypergraph");
    if (num_nodes) *num_nodes = h->h.num_nodes();
    if (num_edges) *num_edges = h->h.num_edges();
  });
}

heal_status heal_hypergraph_degrees(const heal_hypergraph* h, size_t* node_degrees, size_t* edge_degrees) {
  return guarded([&] {
    need(h, "hypergraph");
    if (node_degrees)
      for (size_t v = 0; v < h->h.num_nodes(); ++v) node_degrees[v] = h->h.node_degree(v);
    if (edge_degrees)
      for (size_t e = 0; e < h->h.num_edges(); ++e) edge_degrees[e] = h->h.edge_degree(e);
  });
}

heal_status heal_laplacian(const heal_hypergraph* h, const char* kind, double* out, size_t capacity) {
  return guarded([&] {
    need(out, "out");
    const heal::DenseMatrix L = laplacian_of(h, kind);
    const auto& v = L.values();
    if (capacity < v.size())
      heal::fail(heal::ErrorKind::Range, "output buffer needs " + std::to_string(v.size()) + " entries");
    std::copy(v.begin(), v.end(), out);
  });
}

heal_status heal_spectrum(const heal_hypergraph* h, const char* kind, double* out, size_t capacity) {
  return guarded([&] {
    need(out, "out");
    const auto d = heal::eig_sym(laplacian_of(h, kind));
    if (capacity < d.eigenvalues.size())
      heal::fail(heal::ErrorKind::Range, "output buffer needs " + std::to_string(d.eigenvalues.size()) + " entries");
    std::copy(d.eigenvalues.begin(), d.eigenvalues.end(), out);
  });
}

heal_status heal_cheeger_json(const heal_hypergraph* h, char** out) {
  return guarded([&] {
    need(h, "hypergraph");
    need(out, "out");
    const heal::CheegerReport r = heal::verify_cheeger_inequality(h->h);
    const nlohmann::json j = {{"phi", r.phi},           {"subset", r.subset},      {"lambda1", r.lambda1},
                              {"lower_bound", r.lower}, {"upper_bound", r.upper}, {"holds", r.holds},
                              {"r", r.rank}};
    *out = copy_string(j.dump());
  });
}

heal_status heal_run_command(const char* command, const char* config_json, char** text, char** summary) {
  return guarded([&] {
    need(command, "command");
    const heal::CommandOutput res = heal::run_command(command, config_json ? config_json : "");
    char* t = text ? copy_string(res.text) : nullptr;
    if (summary) {
      try {
        *summary = copy_string(res.summary);
      } catch (...) {
        std::free(t);
        throw;
      }
    }
    if (text) *text = t;
  });
}

heal_status heal_command_defaults(const char* command, char** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    *out = copy_string(heal::command_defaults(command));
  });
}

heal_status heal_generate(const char* topology, size_t n, size_t m, unsigned long long seed, heal_hypergraph** out) {
  return guarded([&] {
    need(topology, "topology");
    need(out, "out");
    wrap(heal::gen_transfer(topology, n, m, seed).hypergraph, out);
  });
}

}
