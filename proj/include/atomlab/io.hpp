#pragma once

// Text formats:
//   ATOMLAB-FIELD v1 n=<n> J=<J> period=<P>   then one "re,im" line per node (row-major)
//   ATOMLAB-COEFF v1 n=<n>                    then "nu,m1[,m2],re,im" lines
//   ATOMLAB-DIFFEO v1 n=<n> J=<J> period=<P> kind=<k> alpha=<a> rho=<r> shift=<s0>,<s1>
//     then "forward" and "inverse" sections giving phi(y_i) and phi^{-1}(y_i) per node.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "atomlab/atoms.hpp"
#include "atomlab/operators.hpp"

namespace atomlab {

void write_field(std::ostream& out, const SampledField& f);
SampledField read_field(std::istream& in);
void save_field(const std::filesystem::path& path, const SampledField& f);
SampledField load_field(const std::filesystem::path& path);

void write_coeffs(std::ostream& out, const CoeffArray& lambda);
CoeffArray read_coeffs(std::istream& in);
void save_coeffs(const std::filesystem::path& path, const CoeffArray& lambda);
CoeffArray load_coeffs(const std::filesystem::path& path);

void write_diffeo(std::ostream& out, const Diffeo& phi);
/// Rebuilds the map: closed-form kinds from the header, sampled perturbations
/// from the forward section.
Diffeo read_diffeo(std::istream& in);

nlohmann::json params_json(const SpaceParams& params);
SpaceParams params_from_json(const nlohmann::json& j);
nlohmann::json certificate_json(const AtomCertificate& cert);

/// "s,p,q,K,L,d" with optional trailing entries; "inf" accepted for p and q.
SpaceParams parse_space(const std::string& text, int n);

/// JSON number or the strings "inf"/"infinity".
double json_real(const nlohmann::json& j);
nlohmann::json real_json(double x);

std::string format_real(double x);

}  // namespace atomlab
