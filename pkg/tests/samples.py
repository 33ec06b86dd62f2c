"""Hand-built trees shared by the tests."""
from __future__ import annotations

SAMPLE_TREE = "0(1(2(3,4),4(9,16),3(3,4)),2(4(6,8),8(18,32),6(6,8)))"
PATTERN_T1 = "1(2(3,4),4(9,16),3(3,4))"
PATTERN_T2 = "2(4(6,8),8(18,32),6(6,8))"
RUNNING_T1 = "B(B,A(A,B),A(C,C),B(C,D,E),A(D,E,C))"
RUNNING_T2 = '"β"("β","α"("γ","γ"),"α"("β","α"),"α"("γ","δ","η"),"β"("η","δ","γ"))'
GROWTH_TREE = "A(A(C,D,E,F),B(C,D,E,F),B)"


def bfs_ids(t) -> list[int]:
    """Preorder ids listed in breadth-first order."""
    order, queue = [], [0]
    while queue:
        u = queue.pop(0)
        order.append(u)
        queue.extend(t.children[u])
    return order
