"""Three writes on seven cells with at most two changes per cell.

Builds the two-change three-write code at n=7 with the component codewords
pinned so that one message sequence writes 1110000, 0111100, 0111000, then
replays it, decoding each write from the cell states it leaves behind.

    python3 demos/example_trace.py
"""
from fractions import Fraction

from elm.constructions import build_construction1, construction1_components, messages_for_states
from elm.memory import apply_write, bits_to_str, str_to_bits

states = [str_to_bits(s) for s in ("1110000", "0111100", "0111000")]
p = Fraction(3, 7), Fraction(1, 2), Fraction(1, 3)
code = build_construction1(7, *p, construction1_components(7, *p), realize=states)
print("message counts", code.M, f"sum-rate {code.sum_rate:.4f}")
print("exhaustive check", code.verified)

msgs = messages_for_states(code, states)
v = (0,) * 7
for j, m in enumerate(msgs):
    x = code.encode(j, m, v)
    v_next, c = apply_write(v, x, code.ell)
    print(f"write {j + 1}: m={m:2d} -> {bits_to_str(c)} counts={v_next} decoded={code.decode(j, c, v)}")
    v = v_next
