#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/join_tree.hpp"
#include "metadecomp/meta_decomposition.hpp"
#include "metadecomp/plan.hpp"

namespace metadecomp {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kParse, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kParse, where + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::kParse, where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::vector<std::string> string_list(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorKind::kParse, where + ": expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) fail(ErrorKind::kParse, where + "[" + std::to_string(i) + "]: expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Query from JSON: {"relations":[{"name":"R1","attrs":["x1","x2"]}],
/// "output":["x1"]}. A missing "output" means every attribute is output.
inline Hypergraph query_from_json(const Json& j, const std::string& where = "query") {
  const Json& rels = detail::field(j, "relations", where);
  if (!rels.is_array()) fail(ErrorKind::kParse, where + ".relations: expected an array");
  std::vector<std::pair<std::string, std::vector<std::string>>> lists;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    std::string at = where + ".relations[" + std::to_string(i) + "]";
    const Json& name = detail::field(rels[i], "name", at);
    if (!name.is_string()) fail(ErrorKind::kParse, at + ".name: expected a string");
    lists.emplace_back(name.get<std::string>(), detail::string_list(detail::field(rels[i], "attrs", at), at + ".attrs"));
  }
  std::vector<std::string> output;
  if (j.contains("output")) {
    output = detail::string_list(j.at("output"), where + ".output");
  } else {
    for (const auto& [name, attrs] : lists)
      for (const auto& a : attrs)
        if (std::find(output.begin(), output.end(), a) == output.end()) output.push_back(a);
  }
  return Hypergraph::from_lists(lists, output);
}

/// Query from text: one "R1(x1, x2)" per line, optionally followed by
/// "OUTPUT x1, x2;" ("OUTPUT ;" for a Boolean query). Without an OUTPUT line
/// every attribute is output. '#' starts a comment.
inline Hypergraph query_from_text(const std::string& text, const std::string& where = "query") {
  std::vector<std::pair<std::string, std::vector<std::string>>> lists;
  std::optional<std::vector<std::string>> output;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    auto e = s.find_last_not_of(" \t\r");
    s.erase(e == std::string::npos ? 0 : e + 1);
    return s;
  };
  auto names = [&](const std::string& body) {
    std::vector<std::string> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": empty attribute name");
      out.push_back(item);
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string upper = line.substr(0, 6);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "OUTPUT" && (line.size() == 6 || !std::isalnum(static_cast<unsigned char>(line[6])))) {
      if (output) fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": second OUTPUT line");
      std::string body = trim(line.substr(6));
      if (body.empty() || body.back() != ';') fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": OUTPUT must end with ';'");
      body = trim(body.substr(0, body.size() - 1));
      output = body.empty() ? std::vector<std::string>{} : names(body);
      continue;
    }
    if (output) fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": relation after OUTPUT");
    auto open = line.find('('), close = line.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open || trim(line.substr(close + 1)) != "")
      fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": expected NAME(attr, ...)");
    std::string name = trim(line.substr(0, open));
    if (name.empty()) fail(ErrorKind::kParse, where + ":" + std::to_string(lineno) + ": missing relation name");
    lists.emplace_back(name, names(line.substr(open + 1, close - open - 1)));
  }
  if (!output) {
    output.emplace();
    for (const auto& [name, attrs] : lists)
      for (const auto& a : attrs)
        if (std::find(output->begin(), output->end(), a) == output->end()) output->push_back(a);
  }
  return Hypergraph::from_lists(lists, *output);
}

/// Reads a query file, choosing JSON or text by its first non-blank character.
inline Hypergraph load_query(const std::string& path) {
  std::string text = detail::read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return query_from_json(detail::parse_json_text(text, path), path);
  return query_from_text(text, path);
}

inline Json query_to_json(const Hypergraph& h) {
  Json rels = Json::array();
  for (RelId r = 0; r < h.num_relations(); ++r)
    rels.push_back({{"name", h.relation_name(r)}, {"attrs", h.attr_list(h.attrs(r))}});
  return {{"relations", rels}, {"output", h.attr_list(h.output())}};
}

inline std::string query_to_text(const Hypergraph& h) {
  std::string out;
  for (RelId r = 0; r < h.num_relations(); ++r) {
    out += h.relation_name(r) + "(";
    auto attrs = h.attr_list(h.attrs(r));
    for (std::size_t i = 0; i < attrs.size(); ++i) out += (i ? ", " : "") + attrs[i];
    out += ")\n";
  }
  out += "OUTPUT ";
  auto outs = h.attr_list(h.output());
  for (std::size_t i = 0; i < outs.size(); ++i) out += (i ? ", " : "") + outs[i];
  return out + ";\n";
}

inline RelSet relset_from_names(const Hypergraph& h, const Json& names, const std::string& where) {
  RelSet s;
  for (const auto& n : detail::string_list(names, where)) {
    auto r = h.find_relation(n);
    if (!r) fail(ErrorKind::kParse, where + ": unknown relation " + n);
    s.insert(*r);
  }
  if (s.empty()) fail(ErrorKind::kParse, where + ": empty relation set");
  return s;
}

/// Cardinalities from {"cards":[{"rels":["R1","R2"],"rows":5}, ...],
/// "domains":{"x1":100, ...}}. Domains, when given for every attribute,
/// enable the fallback estimator.
inline CardinalityProvider cards_from_json(const Json& j, const Hypergraph& h, const std::string& where = "cards") {
  CardinalityProvider cards;
  const Json& list = detail::field(j, "cards", where);
  if (!list.is_array()) fail(ErrorKind::kParse, where + ".cards: expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string at = where + ".cards[" + std::to_string(i) + "]";
    RelSet s = relset_from_names(h, detail::field(list[i], "rels", at), at + ".rels");
    const Json& rows = detail::field(list[i], "rows", at);
    if (!rows.is_number() || rows.get<double>() < 0) fail(ErrorKind::kParse, at + ".rows: expected a non-negative number");
    cards.set(s, rows.get<double>());
  }
  if (j.contains("domains")) {
    const Json& d = j.at("domains");
    if (!d.is_object()) fail(ErrorKind::kParse, where + ".domains: expected an object");
    std::vector<double> sizes(static_cast<std::size_t>(h.num_attributes()), 0.0);
    for (const auto& [name, value] : d.items()) {
      auto a = h.find_attribute(name);
      if (!a) fail(ErrorKind::kParse, where + ".domains: unknown attribute " + name);
      if (!value.is_number() || value.get<double>() <= 0) fail(ErrorKind::kParse, where + ".domains." + name + ": expected a positive number");
      sizes[static_cast<std::size_t>(*a)] = value.get<double>();
    }
    for (AttrId a = 0; a < h.num_attributes(); ++a)
      if (sizes[static_cast<std::size_t>(a)] <= 0)
        fail(ErrorKind::kParse, where + ".domains: missing attribute " + h.attribute_name(a));
    cards.enable_estimator(h, std::move(sizes));
  }
  return cards;
}

inline CardinalityProvider load_cards(const std::string& path, const Hypergraph& h) {
  return cards_from_json(detail::parse_json_text(detail::read_file(path), path), h, path);
}

inline Json cards_to_json(const CardinalityProvider& cards, const Hypergraph& h) {
  std::vector<std::pair<RelSet, double>> entries(cards.table().begin(), cards.table().end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.first.size() != b.first.size() ? a.first.size() < b.first.size() : a.first < b.first;
  });
  Json list = Json::array();
  for (const auto& [s, rows] : entries) {
    std::vector<std::string> names;
    s.for_each([&](RelId r) { names.push_back(h.relation_name(r)); });
    list.push_back({{"rels", names}, {"rows", rows}});
  }
  Json out = {{"cards", list}};
  if (cards.estimator_enabled()) {
    Json d = Json::object();
    for (AttrId a = 0; a < h.num_attributes(); ++a) d[h.attribute_name(a)] = cards.domains()[static_cast<std::size_t>(a)];
    out["domains"] = d;
  }
  return out;
}

/// Plan from {"join":[left, right]} / {"scan":"R1"}, or from a string in the
/// bracket form "((R1,R2),R3)".
inline QueryPlan plan_from_json(const Json& j, const Hypergraph& h, const std::string& where = "plan") {
  if (j.is_string()) return parse_plan_expr(j.get<std::string>(), h);
  if (j.is_object() && j.contains("plan")) return plan_from_json(j.at("plan"), h, where + ".plan");
  if (j.is_object() && j.contains("scan")) {
    const Json& s = j.at("scan");
    if (!s.is_string()) fail(ErrorKind::kParse, where + ".scan: expected a relation name");
    auto r = h.find_relation(s.get<std::string>());
    if (!r) fail(ErrorKind::kParse, where + ".scan: unknown relation " + s.get<std::string>());
    return QueryPlan::scan(*r);
  }
  if (j.is_object() && j.contains("join")) {
    const Json& k = j.at("join");
    if (!k.is_array() || k.size() != 2) fail(ErrorKind::kParse, where + ".join: expected two inputs");
    QueryPlan l = plan_from_json(k[0], h, where + ".join[0]");
    QueryPlan r = plan_from_json(k[1], h, where + ".join[1]");
    if (l.relations().intersects(r.relations())) fail(ErrorKind::kParse, where + ".join: a relation occurs twice");
    return QueryPlan::join(l, r);
  }
  fail(ErrorKind::kParse, where + ": expected a scan, a join or a plan string");
}

inline QueryPlan load_plan(const std::string& path, const Hypergraph& h) {
  std::string text = detail::read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '"'))
    return plan_from_json(detail::parse_json_text(text, path), h, path);
  return parse_plan_expr(text.substr(0, text.find_last_not_of(" \t\r\n") + 1), h);
}

/// Nested plan with per-node relations, interface, kept attributes, width
/// and, when `cards` is given, cardinality.
inline Json plan_to_json(const QueryPlan& p, const Hypergraph& h, const CardinalityProvider* cards = nullptr) {
  std::function<Json(int)> rec = [&](int i) {
    const auto& n = p.node(i);
    Json j = Json::object();
    if (n.leaf()) j["scan"] = h.relation_name(n.relation);
    else j["join"] = Json::array({rec(n.left), rec(n.right)});
    std::vector<std::string> names;
    n.relations.for_each([&](RelId r) { names.push_back(h.relation_name(r)); });
    j["relations"] = names;
    j["interface"] = h.attr_list(h.interface(n.relations));
    j["kept"] = h.attr_list(h.kept_attrs(n.relations));
    j["width"] = node_width(h, n.relations);
    if (cards) j["card"] = cards->cardinality(n.relations);
    return j;
  };
  return p.empty() ? Json() : rec(p.root());
}

inline Json join_tree_to_json(const JoinTree& t, const Hypergraph& h) {
  std::function<Json(int)> rec = [&](int v) {
    Json kids = Json::array();
    for (int c : t.node(v).children) kids.push_back(rec(c));
    return Json{{"relation", h.relation_name(t.node(v).relation)}, {"attrs", h.attr_list(t.node(v).chi)}, {"children", kids}};
  };
  return rec(t.root());
}

inline Json meta_to_json(const MetaDecomposition& m, const Hypergraph& h) {
  Json nodes = Json::array();
  for (int i = 0; i < m.size(); ++i) {
    const auto& n = m.node(i);
    nodes.push_back({{"id", i},
                     {"relation", n.relation ? Json(h.relation_name(*n.relation)) : Json(nullptr)},
                     {"chi", h.attr_list(n.chi)},
                     {"kappa", h.attr_list(n.kappa)},
                     {"parent", n.parent},
                     {"children", n.children}});
  }
  return {{"root", m.root()}, {"size", m.size()}, {"minor", m.num_minor()}, {"fanout", m.fanout()}, {"nodes", nodes}};
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

inline std::string meta_to_dot(const MetaDecomposition& m, const Hypergraph& h) {
  std::ostringstream out;
  out << "digraph meta {\n  node [shape=box];\n";
  for (int i = 0; i < m.size(); ++i) {
    const auto& n = m.node(i);
    std::string label = (n.relation ? h.relation_name(*n.relation) : std::string("minor")) + "\\nchi=" +
                        h.attr_string(n.chi) + "\\nkappa=" + h.attr_string(n.kappa);
    out << "  n" << i << " [label=\"" << detail::dot_escape(label) << "\"" << (n.minor() ? ", style=dashed" : "") << "];\n";
  }
  for (int i = 0; i < m.size(); ++i)
    if (m.node(i).parent >= 0) out << "  n" << m.node(i).parent << " -> n" << i << ";\n";
  out << "}\n";
  return out.str();
}

inline std::string join_tree_to_dot(const JoinTree& t, const Hypergraph& h, const std::string& name = "jointree") {
  std::ostringstream out;
  out << "digraph " << name << " {\n";
  for (int i = 0; i < t.size(); ++i)
    out << "  n" << i << " [label=\"" << detail::dot_escape(h.relation_name(t.node(i).relation) + "\\n" + h.attr_string(t.node(i).chi))
        << "\"];\n";
  for (auto [p, c] : t.edges()) out << "  n" << p << " -> n" << c << ";\n";
  out << "}\n";
  return out.str();
}

inline std::string plan_to_dot(const QueryPlan& p, const Hypergraph& h) {
  std::ostringstream out;
  out << "digraph plan {\n";
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    std::string label = n.leaf() ? h.relation_name(n.relation) : "JOIN\\nI=" + h.attr_string(h.interface(n.relations));
    out << "  p" << i << " [label=\"" << detail::dot_escape(label) << "\"];\n";
    if (!n.leaf()) out << "  p" << i << " -> p" << n.left << ";\n  p" << i << " -> p" << n.right << ";\n";
  }
  out << "}\n";
  return out.str();
}

/// SQL script that evaluates the plan as a chain of temporary views, one per
/// plan node, each projecting onto the attributes the node keeps.
inline std::string plan_to_sql(const QueryPlan& p, const Hypergraph& h) {
  std::ostringstream out;
  std::vector<std::string> view(static_cast<std::size_t>(p.size()));
  auto column_list = [&](const AttrSet& attrs, const std::function<std::string(AttrId)>& source) {
    std::string s;
    attrs.for_each([&](AttrId a) {
      if (!s.empty()) s += ", ";
      s += source(a) + " AS " + h.attribute_name(a);
    });
    return s.empty() ? std::string("1 AS one") : s;
  };
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    std::string name = "v" + std::to_string(i + 1);
    view[static_cast<std::size_t>(i)] = name;
    AttrSet keep = h.kept_attrs(n.relations);
    out << "CREATE TEMP VIEW " << name << " AS SELECT DISTINCT ";
    if (n.leaf()) {
      const std::string& rel = h.relation_name(n.relation);
      out << column_list(keep, [&](AttrId a) { return rel + "." + h.attribute_name(a); }) << " FROM " << rel << ";\n";
      continue;
    }
    const std::string& l = view[static_cast<std::size_t>(n.left)];
    const std::string& r = view[static_cast<std::size_t>(n.right)];
    AttrSet lk = h.kept_attrs(p.node(n.left).relations), rk = h.kept_attrs(p.node(n.right).relations);
    out << column_list(keep, [&](AttrId a) { return (lk.contains(a) ? l : r) + "." + h.attribute_name(a); }) << " FROM "
        << l << " JOIN " << r << " ON ";
    bool first = true;
    (lk & rk).for_each([&](AttrId a) {
      out << (first ? "" : " AND ") << l << "." << h.attribute_name(a) << " = " << r << "." << h.attribute_name(a);
      first = false;
    });
    if (first) out << "TRUE";
    out << ";\n";
  }
  const std::string& top = view.back();
  if (h.is_boolean()) out << "SELECT EXISTS (SELECT 1 FROM " << top << ") AS answer;\n";
  else out << "SELECT * FROM " << top << ";\n";
  return out.str();
}

}  // namespace metadecomp
