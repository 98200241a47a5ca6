#include <cstdio>
#include <string>

#include "ellcert/certify.hpp"

namespace ellcert {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string certificate_to_json(const Certificate& cert) {
  // keys emitted in byte order so output is reproducible
  std::string j = "{\n";
  j += "  \"N\": " + std::to_string(cert.N) + ",\n";
  j += "  \"R\": " + fmt(cert.R) + ",\n";
  j += "  \"V\": " + fmt(cert.V) + ",\n";
  j += "  \"cond_bound\": " + fmt(cert.cond_bound) + ",\n";
  j += "  \"e_b\": " + fmt(cert.E_B) + ",\n";
  j += "  \"e_c\": " + fmt(cert.E_c) + ",\n";
  j += "  \"epsilon\": " + fmt(cert.epsilon) + ",\n";
  j += "  \"lambda\": " + fmt(cert.lambda) + ",\n";
  j += std::string("  \"lambda_convergent\": ") +
       (cert.lambda_convergent ? "true" : "false") + ",\n";
  j += "  \"n\": " + std::to_string(cert.n) + ",\n";
  j += "  \"n_lambda_paper\": " + std::to_string(cert.N_lambda_paper) + ",\n";
  j += "  \"n_lambda_safe\": " + std::to_string(cert.N_lambda_safe) + ",\n";
  j += "  \"norm_b_bound\": " + fmt(cert.normB_bound) + ",\n";
  j += "  \"norm_c_bound\": " + fmt(cert.normc_bound) + ",\n";
  j += "  \"notes\": [";
  for (std::size_t i = 0; i < cert.notes.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + escape(cert.notes[i]) + "\"";
  }
  j += "],\n";
  j += "  \"r\": " + fmt(cert.r) + ",\n";
  j += "  \"sigma_max_cap\": " + fmt(cert.sigma_max_cap) + ",\n";
  j += "  \"sigma_min_floor\": " + fmt(cert.sigma_min_floor) + ",\n";
  j += "  \"z_bar2\": [";
  for (std::size_t i = 0; i < cert.z_bar2.size(); ++i) {
    if (i) j += ", ";
    j += fmt(cert.z_bar2[i]);
  }
  j += "]\n}\n";
  return j;
}

}  // namespace ellcert
