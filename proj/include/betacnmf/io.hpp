#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "betacnmf/bench.hpp"
#include "betacnmf/cnmf.hpp"
#include "betacnmf/nnmat.hpp"

namespace betacnmf {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
/// Strict decimal parse; throws ParseError on trailing garbage.
double parse_double(const std::string& text);

// NMAT v1: "<rows> <cols>" then one line of space separated values per row.
void write_nmat(std::ostream& out, const NonnegMatrix& m);
NonnegMatrix read_nmat(std::istream& in);

// Dictionary file: "<K> <I> <M>" then M NMAT bodies in lag order.
void write_dictionary(std::ostream& out, const ConvDictionary& W);
ConvDictionary read_dictionary(std::istream& in);

NonnegMatrix load_nmat(const std::filesystem::path& path);
void save_nmat(const std::filesystem::path& path, const NonnegMatrix& m);
ConvDictionary load_dictionary(const std::filesystem::path& path);
void save_dictionary(const std::filesystem::path& path, const ConvDictionary& W);

inline constexpr const char* kTraceHeader = "run_id,method,beta,iteration,loss,elapsed_ns";
inline constexpr const char* kStatsHeader = "method,beta,iteration,mean_loss,std_loss,n";
inline constexpr const char* kWelchHeader = "iteration,method_a,method_b,t,df,p";
inline constexpr const char* kRuntimeHeader = "method,beta,mean_ns,ratio";

void write_trace_csv(std::ostream& out, const std::vector<LossTrace>& traces);
/// Groups rows back into traces keyed by (run_id, method, beta).
std::vector<LossTrace> read_trace_csv(std::istream& in);

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows);
void write_welch_csv(std::ostream& out, const std::vector<WelchRow>& rows);
void write_runtime_csv(std::ostream& out, const std::vector<RuntimeRow>& rows);

}  // namespace betacnmf
