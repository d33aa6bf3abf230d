"""Reference BTB-TS tag frequency distributions for the three open POS classes.

These tables serve two purposes: they are the default tag inventories for
synthetic corpora, and test fixtures realize them exactly to validate
frequency reporting. Tags are opaque strings here; only the first
character is ever decoded.
"""

from .corpus import PosClass

NOUN_TAG_COUNTS: dict[str, int] = {
    "N-msi": 18667,
    "N-msh": 4918,
    "N-msf": 2560,
    "N-mpi": 5004,
    "N-mpd": 3136,
    "N-mt": 1966,
    "N-fsi": 15816,
    "N-fsd": 6127,
    "N-fpi": 4992,
    "N-fpd": 1836,
    "N-nsi": 7398,
    "N-nsd": 4288,
    "N-npi": 1992,
    "N-npd": 986,
}

ADJECTIVE_TAG_COUNTS: dict[str, int] = {
    "Amsi": 3256,
    "Amsh": 2062,
    "Amsf": 1099,
    "Afsi": 3287,
    "Afsd": 2785,
    "Ansi": 2074,
    "Ansd": 1492,
    "A-pi": 4172,
    "A-pd": 2811,
}

VERB_TAG_COUNTS: dict[str, int] = {
    "V---f-r1s": 1769,
    "V---f-r2s": 656,
    "V---f-r3s": 15582,
    "V---f-r1p": 1391,
    "V---f-r2p": 634,
    "V---f-r3p": 6711,
    "V---f-t1s": 42,
    "V---f-t2s": 4,
    "V---f-t3s": 831,
    "V---f-t1p": 11,
    "V---f-t2p": 7,
    "V---f-t3p": 259,
    "V---u-o1s": 53,
    "V---u-o2s": 3,
    "V---u-o3s": 112,
    "V---u-o1p": 5,
    "V---u-o2p": 20,
    "V---u-o3p": 22,
    "V---z--2s": 217,
    "V---z---p": 158,
    "V---cao-smi": 1204,
    "V---cao-smh": 55,
    "V---cao-smf": 3,
    "V---cao-sfi": 478,
    "V---cao-sfd": 120,
    "V---cao-sni": 314,
    "V---cao-snd": 25,
    "V---cao-p-i": 941,
    "V---cao-p-d": 133,
    "V---cv--smi": 1124,
    "V---cv--smh": 96,
    "V---cv--smf": 50,
    "V---cv--sfi": 669,
    "V---cv--sfd": 130,
    "V---cv--sni": 522,
    "V---cv--snd": 92,
    "V---cv--p-i": 1305,
    "V---cv--p-d": 327,
    "V---car-smi": 74,
    "V---car-smh": 46,
    "V---car-smf": 17,
    "V---car-sfi": 63,
    "V---car-sfd": 107,
    "V---car-sni": 50,
    "V---car-snd": 48,
    "V---car-p-i": 165,
    "V---car-p-d": 162,
}

REFERENCE_TAG_COUNTS: dict[PosClass, dict[str, int]] = {
    PosClass.NOUN: NOUN_TAG_COUNTS,
    PosClass.ADJECTIVE: ADJECTIVE_TAG_COUNTS,
    PosClass.VERB: VERB_TAG_COUNTS,
}

#: default tag inventories for synthetic corpora, in table order
DEFAULT_TAG_INVENTORIES: dict[PosClass, tuple[str, ...]] = {
    cls: tuple(table) for cls, table in REFERENCE_TAG_COUNTS.items()
}
