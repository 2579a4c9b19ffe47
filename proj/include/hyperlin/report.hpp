#pragma once

#include "hyperlin/exponents.hpp"
#include "hyperlin/spectral.hpp"
#include "hyperlin/types.hpp"

#include <string>
#include <vector>

namespace hyperlin::report {

// Every double is written with 17 significant digits.
std::string fmt(double v);

// key = value lines in insertion order, grouped by [section] headers.
class KeyValue {
 public:
  void section(const std::string& name);
  void put(const std::string& key, double v);
  void put(const std::string& key, int v);
  void put(const std::string& key, long v);
  void put(const std::string& key, unsigned v);
  void put(const std::string& key, bool v);
  void put(const std::string& key, const char* v);
  void put(const std::string& key, const std::string& v);
  void put(const std::string& key, const std::vector<double>& v);
  void put(const std::string& key, const Vec& v);

  std::string str() const { return text_; }
  void write(const std::string& path) const;

 private:
  std::string text_;
};

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  void write(const std::string& path) const;

 private:
  std::size_t width_;
  std::string text_;
};

void put_spectrum(KeyValue& kv, const spectral::SpectrumDecomposition& dec);
void put_condition(KeyValue& kv, const spectral::ConditionReport& r);
void put_margins(KeyValue& kv, const spectral::Margins& m);
void put_exponents(KeyValue& kv, const exponents::ExponentReport& r);

}  // namespace hyperlin::report
