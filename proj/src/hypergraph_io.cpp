#include <fstream>
#include <sstream>
#include <string>

#include "heal/error.hpp"
#include "heal/hypergraph.hpp"

namespace heal {

Hypergraph parse_hypergraph(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) fail(ErrorKind::InvalidArgument, "hypergraph text is empty");
  std::size_t n = 0, m = 0;
  {
    std::istringstream hs(header);
    std::string a, b;
    hs >> a >> b;
    if (a.rfind("nodes=", 0) != 0 || b.rfind("edges=", 0) != 0)
      fail(ErrorKind::InvalidArgument, "expected header 'nodes=<n> edges=<m>', got '" + header + "'");
    try {
      n = std::stoul(a.substr(6));
      m = std::stoul(b.substr(6));
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "malformed header '" + header + "'");
    }
  }
  std::vector<std::vector<std::size_t>> edges;
  edges.reserve(m);
  std::string line;
  while (edges.size() < m && std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::size_t> members;
    long long v = 0;
    while (ls >> v) {
      if (v < 0) fail(ErrorKind::InvalidArgument, "negative node index on line " + std::to_string(edges.size() + 2));
      members.push_back(static_cast<std::size_t>(v));
    }
    if (!ls.eof()) fail(ErrorKind::InvalidArgument, "non-numeric token on line " + std::to_string(edges.size() + 2));
    edges.push_back(std::move(members));
  }
  if (edges.size() != m)
    fail(ErrorKind::InvalidArgument,
         "header declares " + std::to_string(m) + " edges but found " + std::to_string(edges.size()));
  return build_hypergraph(std::move(edges), n);
}

std::string format_hypergraph(const Hypergraph& h) {
  std::ostringstream out;
  out << "nodes=" << h.num_nodes() << " edges=" << h.num_edges() << '\n';
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto members = h.edge_members(e);
    for (std::size_t k = 0; k < members.size(); ++k) out << (k ? " " : "") << members[k];
    out << '\n';
  }
  return out.str();
}

Hypergraph load_hypergraph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open hypergraph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_hypergraph(buf.str());
}

void save_hypergraph(const Hypergraph& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write hypergraph file '" + path + "'");
  out << format_hypergraph(h);
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace heal
