#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metadecomp/caps.hpp"
#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"

namespace metadecomp {

using Value = std::int64_t;
using Row = std::vector<Value>;

/// A relation instance; `schema` lists attribute ids in column order.
struct Table {
  std::vector<AttrId> schema;
  std::vector<Row> rows;
};

/// One in-memory table per relation of a query, with set semantics.
struct MicroDatabase {
  std::vector<Table> tables;

  std::int64_t max_rows() const {
    std::int64_t n = 0;
    for (const auto& t : tables) n = std::max<std::int64_t>(n, static_cast<std::int64_t>(t.rows.size()));
    return n;
  }
};

/// Checks that every table's columns are exactly its relation's attributes
/// and that no table exceeds the row cap.
inline void check_database(const MicroDatabase& db, const Hypergraph& h, std::int64_t row_cap = global_caps().rows) {
  if (static_cast<int>(db.tables.size()) != h.num_relations())
    fail(ErrorKind::kSchema, "database has " + std::to_string(db.tables.size()) + " tables for " +
                                 std::to_string(h.num_relations()) + " relations");
  for (RelId r = 0; r < h.num_relations(); ++r) {
    const auto& t = db.tables[static_cast<std::size_t>(r)];
    if (AttrSet::from_vector(t.schema) != h.attrs(r) || t.schema.size() != h.attrs(r).size())
      fail(ErrorKind::kSchema, "columns of table " + h.relation_name(r) + " differ from its attributes");
    for (const auto& row : t.rows)
      if (row.size() != t.schema.size()) fail(ErrorKind::kSchema, "ragged row in table " + h.relation_name(r));
    require_cap(("rows of " + h.relation_name(r)).c_str(), static_cast<std::int64_t>(t.rows.size()), row_cap);
  }
}

/// Reads `<dir>/<relation>.csv` for every relation. The header names the
/// attributes (any order); the remaining lines hold integers.
inline MicroDatabase load_database(const Hypergraph& h, const std::filesystem::path& dir) {
  MicroDatabase db;
  for (RelId r = 0; r < h.num_relations(); ++r) {
    auto path = dir / (h.relation_name(r) + ".csv");
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kParse, "cannot open " + path.string());
    Table t;
    std::string line;
    int lineno = 0;
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream ss(s);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        out.push_back(cell);
      }
      return out;
    };
    if (!std::getline(in, line)) fail(ErrorKind::kParse, path.string() + ": missing header");
    ++lineno;
    for (const auto& name : split(line)) {
      auto a = h.find_attribute(name);
      if (!a) fail(ErrorKind::kSchema, path.string() + ": unknown attribute " + name);
      t.schema.push_back(*a);
    }
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto cells = split(line);
      if (cells.size() != t.schema.size())
        fail(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(t.schema.size()) + " values");
      Row row;
      for (const auto& c : cells) {
        try {
          std::size_t used = 0;
          row.push_back(std::stoll(c, &used));
          if (used != c.size()) throw std::invalid_argument(c);
        } catch (const std::exception&) {
          fail(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": not an integer: " + c);
        }
      }
      t.rows.push_back(std::move(row));
    }
    db.tables.push_back(std::move(t));
  }
  check_database(db, h);
  return db;
}

inline void save_database(const MicroDatabase& db, const Hypergraph& h, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (RelId r = 0; r < h.num_relations(); ++r) {
    std::ofstream out(dir / (h.relation_name(r) + ".csv"));
    if (!out) fail(ErrorKind::kInvalidArgument, "cannot write table " + h.relation_name(r));
    const auto& t = db.tables[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < t.schema.size(); ++i) out << (i ? "," : "") << h.attribute_name(t.schema[i]);
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }
}

/// Random instance with at most `max_rows` distinct rows per table. Each
/// attribute gets a domain size drawn log-uniformly from [1, max_rows], so
/// joins range from highly selective to nearly Cartesian.
inline MicroDatabase gen_database(const Hypergraph& h, int max_rows, std::uint64_t seed) {
  if (max_rows < 1) fail(ErrorKind::kInvalidArgument, "max_rows must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Value> domain(static_cast<std::size_t>(h.num_attributes()));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& d : domain) d = std::max<Value>(1, static_cast<Value>(std::llround(std::pow(static_cast<double>(max_rows), unit(rng)))));
  MicroDatabase db;
  for (RelId r = 0; r < h.num_relations(); ++r) {
    Table t;
    t.schema = h.attrs(r).to_vector();
    int target = std::uniform_int_distribution<int>(1, max_rows)(rng);
    std::set<Row> rows;
    for (int i = 0; i < target; ++i) {
      Row row;
      for (AttrId a : t.schema) row.push_back(std::uniform_int_distribution<Value>(0, domain[static_cast<std::size_t>(a)] - 1)(rng));
      rows.insert(std::move(row));
    }
    t.rows.assign(rows.begin(), rows.end());
    db.tables.push_back(std::move(t));
  }
  return db;
}

}  // namespace metadecomp
