#include "autowindow/stack_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "autowindow/errors.hpp"
#include "autowindow/keyvalue.hpp"

namespace autowindow {

namespace {

std::string window_key(std::size_t i, const char* name) {
  return "window." + std::to_string(i) + "." + name;
}

}  // namespace

std::string serialize_stack(const AutoWindowStack& stack) {
  stack.validate();
  std::ostringstream out;
  out << "format_version=" << kStackFormatVersion << '\n';
  out << "n_windows=" << stack.n_windows() << '\n';
  out << "kappa=" << stack.kappa() << '\n';
  out << "hu_range=" << stack.hu_range.lo << ' ' << stack.hu_range.hi << '\n';
  for (std::size_t i = 0; i < stack.n_windows(); ++i) {
    const auto& w = stack.extractors[i];
    out << window_key(i, "a") << '=' << kv::format_double(w.a) << '\n';
    out << window_key(i, "b") << '=' << kv::format_double(w.b) << '\n';
    out << window_key(i, "d") << '=' << kv::format_double(w.d) << '\n';
    out << window_key(i, "g") << '=' << kv::format_double(w.g) << '\n';
    out << window_key(i, "k") << '=' << kv::format_double(w.k) << '\n';
    out << window_key(i, "m") << '=' << kv::format_double(w.m) << '\n';
    out << window_key(i, "h") << '=' << kv::format_double(w.h) << '\n';
    const auto& r = stack.rectifiers[i];
    out << "rectifier." << i << ".offsets="
        << kv::format_doubles(r.offsets.data(), static_cast<std::size_t>(r.kappa())) << '\n';
    out << "rectifier." << i << ".intensities="
        << kv::format_doubles(r.intensities.data(), static_cast<std::size_t>(r.kappa())) << '\n';
  }
  for (Eigen::Index i = 0; i < stack.fusion.size(); ++i) {
    const Eigen::RowVectorXd row = stack.fusion.raw.row(i);
    out << "fusion." << i << '=' << kv::format_doubles(row.data(), static_cast<std::size_t>(row.size()))
        << '\n';
  }
  return out.str();
}

AutoWindowStack parse_stack(std::string_view text) {
  try {
    const auto doc = kv::Document::parse(text);
    if (doc.get_int("format_version") != kStackFormatVersion) {
      throw BadStackFile("stack file: unsupported format_version");
    }
    const long long n = doc.get_int("n_windows");
    const long long kappa = doc.get_int("kappa");
    if (n < 1 || kappa < 0) throw BadStackFile("stack file: need n_windows >= 1 and kappa >= 0");
    const auto range = doc.get_ints("hu_range");
    if (range.size() != 2) throw BadStackFile("stack file: hu_range needs lo hi");

    AutoWindowStack stack;
    stack.hu_range = {static_cast<int>(range[0]), static_cast<int>(range[1])};
    stack.fusion.raw.resize(n, n);
    for (long long i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      WindowParamsd w;
      w.a = doc.get_double(window_key(idx, "a"));
      w.b = doc.get_double(window_key(idx, "b"));
      w.d = doc.get_double(window_key(idx, "d"));
      w.g = doc.get_double(window_key(idx, "g"));
      w.k = doc.get_double(window_key(idx, "k"));
      w.m = doc.get_double(window_key(idx, "m"));
      w.h = doc.get_double(window_key(idx, "h"));
      stack.extractors.push_back(w);

      const auto prefix = "rectifier." + std::to_string(i);
      const auto offsets = doc.get_doubles(prefix + ".offsets");
      const auto intensities = doc.get_doubles(prefix + ".intensities");
      if (offsets.size() != static_cast<std::size_t>(kappa) ||
          intensities.size() != static_cast<std::size_t>(kappa)) {
        throw BadStackFile("stack file: " + prefix + " must have kappa entries");
      }
      RectifierParamsd r(kappa);
      for (long long j = 0; j < kappa; ++j) {
        r.offsets[j] = offsets[static_cast<std::size_t>(j)];
        r.intensities[j] = intensities[static_cast<std::size_t>(j)];
      }
      stack.rectifiers.push_back(std::move(r));

      const auto row = doc.get_doubles("fusion." + std::to_string(i));
      if (row.size() != static_cast<std::size_t>(n)) {
        throw BadStackFile("stack file: fusion." + std::to_string(i) + " must have n_windows entries");
      }
      for (long long j = 0; j < n; ++j) stack.fusion.raw(i, j) = row[static_cast<std::size_t>(j)];
    }
    stack.validate();
    return stack;
  } catch (const BadStackFile&) {
    throw;
  } catch (const Error& e) {
    throw BadStackFile(std::string("stack file: ") + e.what());
  }
}

void save_stack(const AutoWindowStack& stack, const std::filesystem::path& path) {
  const auto text = serialize_stack(stack);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write stack file '" + path.string() + "'");
  out << text;
  if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

AutoWindowStack load_stack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadStackFile("cannot open stack file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_stack(ss.str());
}

}  // namespace autowindow
