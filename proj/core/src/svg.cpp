#include "weseg/svg.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace weseg {

namespace {

constexpr double kSize = 640.0;
constexpr double kMargin = 70.0;
constexpr double kPlot = kSize - 2.0 * kMargin;

constexpr std::array<const char*, 6> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

double px(double fpr) { return kMargin + fpr * kPlot; }
double py(double tpr) { return kSize - kMargin - tpr * kPlot; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_roc_svg(const std::filesystem::path& path, const std::string& title,
                   const std::vector<RocSeries>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
     << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << " " << kSize
     << "\">\n";
  os << "<rect width=\"" << kSize << "\" height=\"" << kSize << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kSize / 2 << "\" y=\"35\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"18\">" << title << "</text>\n";

  // Axes box and ticks.
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot
     << "\" height=\"" << kPlot << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double f = i / 5.0;
    os << "<line x1=\"" << px(f) << "\" y1=\"" << py(0) << "\" x2=\"" << px(f)
       << "\" y2=\"" << py(0) + 6 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(f) << "\" y=\"" << py(0) + 22
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << num(f) << "</text>\n";
    os << "<line x1=\"" << px(0) - 6 << "\" y1=\"" << py(f) << "\" x2=\"" << px(0)
       << "\" y2=\"" << py(f) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(0) - 10 << "\" y=\"" << py(f) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
       << num(f) << "</text>\n";
  }
  os << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 15
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        "false positive rate</text>\n";
  os << "<text x=\"20\" y=\"" << kSize / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        "transform=\"rotate(-90 20 " << kSize / 2 << ")\">true positive rate</text>\n";

  // Chance diagonal.
  os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
     << "\" y2=\"" << py(1) << "\" stroke=\"#999999\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const RocPoint& p : series[s].points) {
      os << num(px(p.fpr)) << "," << num(py(p.tpr)) << " ";
    }
    os << "\"/>\n";
    const double ly = kMargin + 20.0 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << px(0.55) << "\" y1=\"" << ly << "\" x2=\"" << px(0.62)
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(0.63) << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].label
       << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace weseg
