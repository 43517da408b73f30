#ifndef DISPLAB_CSV_HPP
#define DISPLAB_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace displab {

/// Comma-separated, UTF-8, '.' decimal point, scientific notation permitted;
/// one header row; %.17g-style doubles so reruns are byte-identical.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) os_ << ',';
      os_ << header[i];
    }
    os_ << '\n';
    os_.precision(17);
  }

  template <class... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((write_cell(vals, first)), ...);
    os_ << '\n';
  }

  std::string str() const { return os_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << os_.str();
  }

 private:
  template <class T>
  void write_cell(const T& v, bool& first) {
    if (!first) os_ << ',';
    first = false;
    os_ << v;
  }
  std::ostringstream os_;
};

}  // namespace displab

#endif
