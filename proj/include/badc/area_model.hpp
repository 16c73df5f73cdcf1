#pragma once

// Design-rule transistor counting for Flash, full binary-search and pruned
// binary-search ADCs.
//
// Binary-search ADC structure (N bits, stages 1..N):
//   * one data comparator per stage, fed a reference picked by that stage's
//     selection network (the root stage uses Vref/2 directly);
//   * for every node t of an intermediate stage (2..N-1), an enable
//     comparator with the fixed reference t/2^N whose output steers the
//     next stage's selection between t's two children. A node that is the
//     upper (right) child of its parent uses a single-output comparator
//     followed by a double inversion and a level-shifting amplifier (TA);
//     lower children use a regular dual-output comparator;
//   * stage k >= 2 selects its reference with a pass-transistor tree of
//     2^k - 2 switches: one per stage-k threshold plus one per tree node at
//     depths 1..k-2.
// For N = 3 this yields 5 comparators (one single-output), 2 inverters and
// 9 control/amplifier transistors (T0..T7 + TA).
//
// Pruning keeps only structure that still separates kept codes: a stage's
// data comparator needs at least one retained boundary in that stage, an
// enable comparator needs its own node and at least one child retained, a
// selection switch needs a retained stage-k threshold in its subtree. Every
// pruned last-stage control entry also removes one decode gate, credited
// against (and never exceeding) that stage's surviving selection switches.

#include <string>
#include <vector>

#include "badc/adc_model.hpp"

namespace badc {

struct CostTable {
  int comp_tr = 7;         // dual-output comparator
  int comp_noinv_tr = 6;   // single-output comparator
  int comp_res = 2;
  int comp_noinv_res = 1;
  int inv_tr = 1;
  int inv_res = 1;
  int sel_tr = 1;          // Vref selection switch
  int amp_tr = 1;          // level-shifting amplifier (TA)
  int and_gate_tr = 3;     // last-stage control decode gate
  int ladder_res = 1;      // per resistor-ladder rung (Flash)
  // Flash encoder: encoder_coeff * N * 2^(N-1) transistors unless overridden
  // per bit-width in encoder_override (index N, -1 = use formula).
  int encoder_coeff = 4;
  std::vector<int> encoder_override;

  int flash_encoder_tr(int n_bits) const;
  // Throws InvalidArgument on negative costs or comp_noinv_tr > comp_tr.
  void validate() const;

  bool operator==(const CostTable&) const = default;
};

struct AreaBreakdown {
  long comparator_tr = 0;
  long inverter_tr = 0;
  long selection_tr = 0;
  long amplifier_tr = 0;
  long encoder_tr = 0;
  long decode_credit_tr = 0;  // <= 0

  long total() const {
    return comparator_tr + inverter_tr + selection_tr + amplifier_tr + encoder_tr +
           decode_credit_tr;
  }
  bool operator==(const AreaBreakdown&) const = default;
};

struct AreaReport {
  long transistors = 0;
  long resistors = 0;
  int comparators = 0;
  int single_output_comparators = 0;
  int inverters = 0;
  int amplifiers = 0;
  int selection_switches = 0;
  // Surviving selection switches per stage (index k-1); empty for Flash.
  std::vector<int> selection_per_stage;
  AreaBreakdown breakdown;

  long control_transistors() const { return breakdown.selection_tr + breakdown.amplifier_tr; }

  AreaReport& operator+=(const AreaReport& other);
  bool operator==(const AreaReport&) const = default;
};

AreaReport binary_full_area(int n_bits, const CostTable& cost = {});
AreaReport flash_area(int n_bits, const CostTable& cost = {});
AreaReport pruned_area(const PrunedAdc& adc, const CostTable& cost = {});
AreaReport adc_area(const AdcKind& adc, const CostTable& cost = {});

// Element-wise sum over one ADC per classifier input. Throws on empty input.
AreaReport system_area(const std::vector<AdcKind>& adcs, const CostTable& cost = {});
AreaReport system_area(const std::vector<PrunedAdc>& adcs, const CostTable& cost = {});

std::string format_report(const AreaReport& r);

}  // namespace badc
