/** Sequence gate: at most one logical in-flight request per panel wins.
 * Responses that arrive after a newer request was issued are dropped. */

export class SequenceGate {
    private issued = 0;
    private accepted = 0;

    /** Mark a new request; returns its ticket. */
    next(): number {
        this.issued += 1;
        return this.issued;
    }

    /** True iff this ticket is still the newest issued and unbeaten. */
    accept(ticket: number): boolean {
        if (ticket < this.issued || ticket <= this.accepted) {
            return false;
        }
        this.accepted = ticket;
        return true;
    }
}
