#include "badc/area_model.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "badc/error.hpp"

namespace badc {

int CostTable::flash_encoder_tr(int n_bits) const {
  check_adc_bits(n_bits);
  const auto idx = static_cast<std::size_t>(n_bits);
  if (idx < encoder_override.size() && encoder_override[idx] >= 0) return encoder_override[idx];
  return encoder_coeff * n_bits * (1 << (n_bits - 1));
}

void CostTable::validate() const {
  const int fields[] = {comp_tr, comp_noinv_tr, comp_res, comp_noinv_res, inv_tr,     inv_res,
                        sel_tr,  amp_tr,        and_gate_tr, ladder_res,   encoder_coeff};
  for (int f : fields) {
    if (f < 0) throw InvalidArgument("cost table entries must be non-negative");
  }
  if (comp_noinv_tr > comp_tr) {
    throw InvalidArgument("single-output comparator cannot cost more than a full comparator");
  }
}

AreaReport& AreaReport::operator+=(const AreaReport& o) {
  transistors += o.transistors;
  resistors += o.resistors;
  comparators += o.comparators;
  single_output_comparators += o.single_output_comparators;
  inverters += o.inverters;
  amplifiers += o.amplifiers;
  selection_switches += o.selection_switches;
  if (selection_per_stage.size() < o.selection_per_stage.size()) {
    selection_per_stage.resize(o.selection_per_stage.size(), 0);
  }
  for (std::size_t i = 0; i < o.selection_per_stage.size(); ++i) {
    selection_per_stage[i] += o.selection_per_stage[i];
  }
  breakdown.comparator_tr += o.breakdown.comparator_tr;
  breakdown.inverter_tr += o.breakdown.inverter_tr;
  breakdown.selection_tr += o.breakdown.selection_tr;
  breakdown.amplifier_tr += o.breakdown.amplifier_tr;
  breakdown.encoder_tr += o.breakdown.encoder_tr;
  breakdown.decode_credit_tr += o.breakdown.decode_credit_tr;
  return *this;
}

namespace {

using Retained = std::vector<bool>;  // indexed by threshold position

int trailing_zeros(int position) { return std::countr_zero(static_cast<unsigned>(position)); }

// Ancestor of `position` (inclusive) sitting at tree depth d.
int ancestor_at_depth(int position, int d, int n_bits) {
  const int tz = n_bits - 1 - d;
  return ((position >> tz) | 1) << tz;
}

bool is_upper_child(int position) {
  return ((position >> (trailing_zeros(position) + 1)) & 1) != 0;
}

AreaReport count_binary(int n_bits, const Retained& kept, const CostTable& cost) {
  cost.validate();
  const int levels = level_count(n_bits);
  AreaReport r;
  r.selection_per_stage.assign(static_cast<std::size_t>(n_bits), 0);

  auto add_full_comparator = [&] {
    ++r.comparators;
    r.breakdown.comparator_tr += cost.comp_tr;
    r.resistors += cost.comp_res;
  };

  std::vector<int> stage_retained(static_cast<std::size_t>(n_bits) + 1, 0);
  for (int t = 1; t < levels; ++t) {
    if (kept[static_cast<std::size_t>(t)]) ++stage_retained[static_cast<std::size_t>(n_bits - trailing_zeros(t))];
  }

  // Data comparator per stage.
  for (int k = 1; k <= n_bits; ++k) {
    if (stage_retained[static_cast<std::size_t>(k)] > 0) add_full_comparator();
  }

  // Enable comparators on intermediate stages.
  for (int t = 1; t < levels; ++t) {
    const int tz = trailing_zeros(t);
    const int stage = n_bits - tz;
    if (stage < 2 || stage > n_bits - 1) continue;
    if (!kept[static_cast<std::size_t>(t)]) continue;
    const int half = 1 << (tz - 1);
    if (!kept[static_cast<std::size_t>(t - half)] && !kept[static_cast<std::size_t>(t + half)]) continue;
    if (is_upper_child(t)) {
      ++r.comparators;
      ++r.single_output_comparators;
      r.breakdown.comparator_tr += cost.comp_noinv_tr;
      r.resistors += cost.comp_noinv_res;
      r.inverters += 2;
      r.breakdown.inverter_tr += 2L * cost.inv_tr;
      r.resistors += 2L * cost.inv_res;
      ++r.amplifiers;
      r.breakdown.amplifier_tr += cost.amp_tr;
    } else {
      add_full_comparator();
    }
  }

  // Selection networks: a switch at node u (depth 1..k-1) survives when some
  // retained stage-k threshold lies in u's subtree.
  int last_stage_switches = 0;
  for (int k = 2; k <= n_bits; ++k) {
    std::set<int> switches;
    for (int t = 1; t < levels; ++t) {
      if (!kept[static_cast<std::size_t>(t)] || n_bits - trailing_zeros(t) != k) continue;
      for (int d = 1; d <= k - 1; ++d) switches.insert(ancestor_at_depth(t, d, n_bits));
    }
    const int n = static_cast<int>(switches.size());
    r.selection_per_stage[static_cast<std::size_t>(k - 1)] = n;
    r.selection_switches += n;
    r.breakdown.selection_tr += static_cast<long>(n) * cost.sel_tr;
    if (k == n_bits) last_stage_switches = n;
  }

  const int last_stage_pruned = (levels / 2) - stage_retained[static_cast<std::size_t>(n_bits)];
  const long credit = std::min(static_cast<long>(last_stage_pruned) * cost.and_gate_tr,
                               static_cast<long>(last_stage_switches) * cost.sel_tr);
  r.breakdown.decode_credit_tr = -credit;

  r.transistors = r.breakdown.total();
  return r;
}

}  // namespace

AreaReport binary_full_area(int n_bits, const CostTable& cost) {
  check_adc_bits(n_bits);
  Retained all(static_cast<std::size_t>(level_count(n_bits)), true);
  return count_binary(n_bits, all, cost);
}

AreaReport flash_area(int n_bits, const CostTable& cost) {
  check_adc_bits(n_bits);
  cost.validate();
  const int comps = level_count(n_bits) - 1;
  AreaReport r;
  r.comparators = comps;
  r.breakdown.comparator_tr = static_cast<long>(comps) * cost.comp_tr;
  r.breakdown.encoder_tr = cost.flash_encoder_tr(n_bits);
  r.resistors = static_cast<long>(comps) * cost.comp_res +
                static_cast<long>(level_count(n_bits)) * cost.ladder_res;
  r.transistors = r.breakdown.total();
  return r;
}

AreaReport pruned_area(const PrunedAdc& adc, const CostTable& cost) {
  Retained kept(static_cast<std::size_t>(level_count(adc.n_bits())), false);
  for (int b : adc.boundaries()) kept[static_cast<std::size_t>(b)] = true;
  return count_binary(adc.n_bits(), kept, cost);
}

AreaReport adc_area(const AdcKind& adc, const CostTable& cost) {
  return std::visit(
      [&](const auto& a) -> AreaReport {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, FullBinary>) {
          return binary_full_area(a.n_bits, cost);
        } else if constexpr (std::is_same_v<T, Flash>) {
          return flash_area(a.n_bits, cost);
        } else {
          return pruned_area(a.adc, cost);
        }
      },
      adc);
}

AreaReport system_area(const std::vector<AdcKind>& adcs, const CostTable& cost) {
  if (adcs.empty()) throw InvalidArgument("system area needs at least one ADC");
  AreaReport total;
  for (const auto& a : adcs) total += adc_area(a, cost);
  return total;
}

AreaReport system_area(const std::vector<PrunedAdc>& adcs, const CostTable& cost) {
  if (adcs.empty()) throw InvalidArgument("system area needs at least one ADC");
  AreaReport total;
  for (const auto& a : adcs) total += pruned_area(a, cost);
  return total;
}

std::string format_report(const AreaReport& r) {
  std::ostringstream os;
  os << "transistors          " << r.transistors << '\n'
     << "resistors            " << r.resistors << '\n'
     << "comparators          " << r.comparators << " (" << r.single_output_comparators
     << " single-output)\n"
     << "inverters            " << r.inverters << '\n'
     << "amplifiers           " << r.amplifiers << '\n'
     << "selection switches   " << r.selection_switches << '\n';
  if (!r.selection_per_stage.empty()) {
    os << "  per stage         ";
    for (int s : r.selection_per_stage) os << ' ' << s;
    os << '\n';
  }
  os << "breakdown (transistors)\n"
     << "  comparators        " << r.breakdown.comparator_tr << '\n'
     << "  inverters          " << r.breakdown.inverter_tr << '\n'
     << "  selection          " << r.breakdown.selection_tr << '\n'
     << "  amplifiers         " << r.breakdown.amplifier_tr << '\n'
     << "  encoder            " << r.breakdown.encoder_tr << '\n'
     << "  decode credit      " << r.breakdown.decode_credit_tr << '\n';
  return os.str();
}

}  // namespace badc
