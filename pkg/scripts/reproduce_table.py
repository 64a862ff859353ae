"""Print the recomputed reference table next to the published values, with and without corrections."""
from pdccal import reference


def main():
    for corrections in (True, False):
        print(f"corrections {'on' if corrections else 'off'}")
        for kind, col in reference.COLUMNS.items():
            est = reference.recompute(kind, corrections=corrections)
            print(f"  {kind.value:<20} eta*T {est.eta_times_t}  (table {col.eta_times_t.value:.3f})"
                  f"   eta {est.eta}  (table {col.eta.value:.3f})")
    print(f"dead time implied by the AND-gate gamma: {reference.dead_time_from_column() * 1e9:.2f} ns")


if __name__ == "__main__":
    main()
