#include "hyperlin/report.hpp"

#include "hyperlin/error.hpp"

#include <cstdio>
#include <fstream>

namespace hyperlin::report {

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

}  // namespace

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void KeyValue::section(const std::string& name) { text_ += (text_.empty() ? "[" : "\n[") + name + "]\n"; }
void KeyValue::put(const std::string& key, double v) { put(key, fmt(v)); }
void KeyValue::put(const std::string& key, int v) { put(key, std::to_string(v)); }
void KeyValue::put(const std::string& key, long v) { put(key, std::to_string(v)); }
void KeyValue::put(const std::string& key, unsigned v) { put(key, std::to_string(v)); }
void KeyValue::put(const std::string& key, bool v) { put(key, std::string(v ? "true" : "false")); }
void KeyValue::put(const std::string& key, const char* v) { put(key, std::string(v)); }
void KeyValue::put(const std::string& key, const std::string& v) { text_ += key + " = " + v + "\n"; }
void KeyValue::put(const std::string& key, const std::vector<double>& v) { put(key, join(v)); }
void KeyValue::put(const std::string& key, const Vec& v) { put(key, std::vector<double>(v.data(), v.data() + v.size())); }
void KeyValue::write(const std::string& path) const { write_file(path, text_); }

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Csv::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(fmt(v));
  row(cells);
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorCode::InvalidArgument, "csv row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
}

void Csv::write(const std::string& path) const { write_file(path, text_); }

void put_spectrum(KeyValue& kv, const spectral::SpectrumDecomposition& dec) {
  kv.put("bands", dec.m());
  kv.put("contracting_bands", dec.d);
  for (int i = 0; i < dec.m(); ++i)
    kv.put("band" + std::to_string(i + 1), std::vector<double>{dec.bands[i].lo, dec.bands[i].hi});
}

void put_condition(KeyValue& kv, const spectral::ConditionReport& r) {
  kv.put(r.name + ".holds", r.holds);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const std::string key = r.name + ".row" + std::to_string(i + 1);
    kv.put(key + ".label", r.rows[i].label);
    kv.put(key + ".lhs", r.rows[i].lhs);
    kv.put(key + ".rhs", r.rows[i].rhs);
  }
}

void put_margins(KeyValue& kv, const spectral::Margins& m) {
  kv.put("delta", m.delta);
  kv.put("mu_minus", m.mu_minus);
  kv.put("mu_plus", m.mu_plus);
}

void put_exponents(KeyValue& kv, const exponents::ExponentReport& r) {
  kv.put("epsilon", r.epsilon);
  kv.put("contraction.beta", r.contraction.beta);
  kv.put("contraction.zeta", r.contraction.zeta);
  kv.put("expansion.beta", r.expansion.beta);
  kv.put("expansion.zeta", r.expansion.zeta);
  kv.put("beta_s", r.beta_s);
  kv.put("beta_u", r.beta_u);
  kv.put("beta_1", r.beta_1);
  kv.put("beta_m", r.beta_m);
  kv.put("beta_overall", r.beta_overall);
}

}  // namespace hyperlin::report
