"""Lyric-to-melody composition by retrieval from a generated fragment database."""

from ._core import (  # noqa: F401
    BuildConfig,
    BuildStats,
    ChordSymbol,
    ComposeOptions,
    Fragment,
    FragmentDatabase,
    GuidelineConfig,
    InsertResult,
    Language,
    LineRecord,
    MelodyModel,
    MidiSong,
    Mode,
    Note,
    NoteToken,
    Song,
    StructureLabel,
    TimeBase,
    Tonality,
    TonalityResult,
    build_chord_regex,
    build_database,
    compose_song,
    count_syllables,
    detokenize,
    dist_n,
    ent_n,
    infer_chords,
    infer_tonality,
    iou,
    is_monotonous,
    midi_to_pitch_name,
    pitch_name_to_midi,
    read_midi,
    recognize_structure,
    render_song_report,
    split_into_bars,
    tokenize,
    transpose_notes,
    write_midi,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
