"""Software twin of a 12-channel voltage pulse driver.

Subsystems: static device description (`device`), waveform synthesis
(`signal_chain`), framed serial control protocol (`protocol`), device
emulator (`emulator`), transports and host driver (`transport`), QKD
modulation planner (`planner`), fiber/free-space link budget
(`link_budget`), virtual oscilloscope (`measure`), and the acceptance
bench with CLI and control API (`bench`, `service`, `cli`).
"""

__version__ = "0.1.0"
