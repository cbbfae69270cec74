#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "degma/diagnostics.hpp"
#include "degma/field.hpp"
#include "degma/radial.hpp"
#include "degma/solution.hpp"

namespace degma {

// Rows "x,y,f,g,mask" in row-major order with 17 significant digits.
void write_solution_csv(const ScalarField2D& f, const ScalarField2D& g, const std::string& path);

// Density column of a solution CSV, checked against the grid the domain and n produce.
ScalarField2D read_solution_csv(const std::string& path, const ConvexDomain& domain, int n);

// Rows "r,f,fprime,g,gprime".
void write_profile_csv(const RadialSolution& sol, const std::string& path);

std::string sha256_file(const std::string& path);

// Every file a run writes, with sizes and content hashes.
class Manifest {
public:
    explicit Manifest(std::string dir) : dir_(std::move(dir)) {}
    const std::string& dir() const { return dir_; }
    // Path under the output directory for `name`.
    std::string path(const std::string& name) const;
    void add(const std::string& file, const std::string& kind);
    // Writes manifest.json into the output directory.
    void write(const std::string& command, int status) const;
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        std::string file, kind;
    };
    std::string dir_;
    std::vector<Entry> entries_;
};

inline constexpr int kReportSchema = 1;

nlohmann::ordered_json to_json(const ConvergenceReport& r);
nlohmann::ordered_json to_json(const EstimateReport& r);
nlohmann::ordered_json to_json(const PatchReport& r);
nlohmann::ordered_json to_json(const ClassifyResult& r);

void write_json(const nlohmann::ordered_json& j, const std::string& path);

// Plot-ready columnar files.
// Closed curve "x,y" with the first vertex repeated at the end.
void write_interface_polyline(const Interface& iface, const std::string& path);
// "x,y,value" for every interior node.
void write_heatmap(const ScalarField2D& field, const std::string& path);
// "t,residual" from continuation ledger records (accepted states only).
void write_ledger_series(const std::vector<std::string>& ledger, const std::string& path);

}  // namespace degma
